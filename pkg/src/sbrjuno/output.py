"""CSV, JSON and minimal SVG emission with deterministic number formatting."""

from __future__ import annotations

import csv
import io
import json

from mpmath import mp, mpf


def fmt_num(value, digits: int) -> str:
    """Locale-independent rendering with ``digits`` significant digits."""
    if isinstance(value, bool):
        return "true" if value else "false"
    if isinstance(value, int):
        return str(value)
    if isinstance(value, float):
        value = mpf(value)
    if value == mp.inf:
        return "inf"
    if value == -mp.inf:
        return "-inf"
    if mp.isnan(value):
        return "nan"
    return mp.nstr(value, digits, strip_zeros=False, min_fixed=-4, max_fixed=digits)


def csv_text(header: list[str], rows, digits: int) -> str:
    buf = io.StringIO()
    writer = csv.writer(buf, lineterminator="\n")
    writer.writerow(header)
    for row in rows:
        writer.writerow([v if isinstance(v, str) else fmt_num(v, digits) for v in row])
    return buf.getvalue()


def json_text(payload) -> str:
    return json.dumps(payload, indent=2, sort_keys=False) + "\n"


def svg_text(series: dict[str, list[tuple[float, float]]], width: int = 640, height: int = 400, title: str = "") -> str:
    """Polylines plus a bounding box; infinite or NaN points are skipped."""
    pts = [(x, y) for line in series.values() for x, y in line if _finite(x) and _finite(y)]
    if not pts:
        pts = [(0.0, 0.0), (1.0, 1.0)]
    x0, x1 = min(p[0] for p in pts), max(p[0] for p in pts)
    y0, y1 = min(p[1] for p in pts), max(p[1] for p in pts)
    x1, y1 = (x1 if x1 > x0 else x0 + 1), (y1 if y1 > y0 else y0 + 1)
    pad = 40

    def sx(x):
        return pad + (x - x0) / (x1 - x0) * (width - 2 * pad)

    def sy(y):
        return height - pad - (y - y0) / (y1 - y0) * (height - 2 * pad)

    colors = ["#1f77b4", "#d62728", "#2ca02c", "#9467bd", "#ff7f0e", "#8c564b"]
    out = [
        f'<svg xmlns="http://www.w3.org/2000/svg" width="{width}" height="{height}" viewBox="0 0 {width} {height}">',
        f'<rect x="{pad}" y="{pad}" width="{width - 2 * pad}" height="{height - 2 * pad}" fill="none" stroke="black"/>',
        f'<text x="{pad}" y="{pad - 10}" font-size="12">{title}</text>',
        f'<text x="{pad}" y="{height - 10}" font-size="10">x: [{x0:.4g}, {x1:.4g}]  y: [{y0:.4g}, {y1:.4g}]</text>',
    ]
    for i, (name, line) in enumerate(series.items()):
        coords = " ".join(f"{sx(x):.2f},{sy(y):.2f}" for x, y in line if _finite(x) and _finite(y))
        color = colors[i % len(colors)]
        out.append(f'<polyline fill="none" stroke="{color}" stroke-width="1" points="{coords}"><title>{name}</title></polyline>')
    out.append("</svg>")
    return "\n".join(out) + "\n"


def _finite(v) -> bool:
    try:
        f = float(v)
    except (TypeError, ValueError, OverflowError):
        return False
    return f == f and f not in (float("inf"), float("-inf"))
