"""Outward-rounded interval arithmetic and the certified positivity scheme."""

from .interval import Interval, interval_precision
from .lemma import (
    ContractionCertificate,
    WPositiveCertificate,
    beta_fn,
    certify_psi_negative,
    check_w_positive,
    gamma_fn,
    psi_fn,
    r_fn,
    verify_contraction,
    w_fn,
)

__all__ = [
    "ContractionCertificate",
    "Interval",
    "WPositiveCertificate",
    "beta_fn",
    "certify_psi_negative",
    "check_w_positive",
    "gamma_fn",
    "interval_precision",
    "psi_fn",
    "r_fn",
    "verify_contraction",
    "w_fn",
]
