from __future__ import annotations

import os

DEFAULT_DIGITS = 50
GUARD_DIGITS = 10
MIN_DIGITS = 20


def resolve_digits(digits: int | None = None) -> int:
    """Working precision in significant decimal digits.

    An explicit argument wins; otherwise ``BRJUNO_PRECISION`` from the
    environment, otherwise 50.
    """
    if digits is None:
        env = os.environ.get("BRJUNO_PRECISION")
        digits = int(env) if env else DEFAULT_DIGITS
    if digits < MIN_DIGITS:
        raise ValueError(f"precision must be >= {MIN_DIGITS} digits, got {digits}")
    return int(digits)
