"""Report artifacts: JSON document, CSV tables, hand-rolled SVG plots.

CSV cells print floats with repr() (shortest round-trip form) and contain no
timestamps, so identical computations give identical bytes.  Timings live
only in the JSON report.
"""

from __future__ import annotations

import json
import math
from dataclasses import dataclass

import numpy as np

__all__ = ["write_json", "write_csv", "fit_rate", "RateFit", "svg_plot", "svg_mesh"]

SCHEMA = "kondra-report/1"


def write_json(path, document: dict):
    document = dict(document)
    document.setdefault("schema", SCHEMA)
    with open(path, "w") as fh:
        json.dump(document, fh, indent=2, sort_keys=True)
        fh.write("\n")


def _cell(v) -> str:
    if isinstance(v, bool):
        return "true" if v else "false"
    if isinstance(v, float):
        return repr(v)
    if isinstance(v, (np.floating,)):
        return repr(float(v))
    if isinstance(v, (int, np.integer)):
        return str(int(v))
    return str(v)


def write_csv(path, header, rows):
    with open(path, "w") as fh:
        fh.write(",".join(header) + "\n")
        for row in rows:
            fh.write(",".join(_cell(v) for v in row) + "\n")


@dataclass(frozen=True)
class RateFit:
    slope: float
    intercept: float
    r2: float

    @property
    def low_confidence(self) -> bool:
        return self.r2 < 0.98

    @property
    def flag(self) -> str:
        return "LOW-CONFIDENCE" if self.low_confidence else "ok"


def fit_rate(dofs, errors, points: int = 3) -> RateFit:
    """Least-squares slope of log(error) against log(dof^{-1/2}).

    Uses the last `points` levels (>= 3); slope 1 means error ~ dof^{-1/2}.
    """
    dofs = np.asarray(dofs, dtype=float)[-points:]
    errors = np.asarray(errors, dtype=float)[-points:]
    if len(dofs) < 3:
        raise ValueError("rate fits need at least 3 points")
    if np.any(errors <= 0.0) or np.any(dofs <= 0.0):
        raise ValueError("rate fits need positive errors and dof counts")
    x = -0.5 * np.log(dofs)
    y = np.log(errors)
    slope, intercept = np.polyfit(x, y, 1)
    fitted = slope * x + intercept
    ss_res = float(((y - fitted) ** 2).sum())
    ss_tot = float(((y - y.mean()) ** 2).sum())
    r2 = 1.0 if ss_tot == 0.0 else 1.0 - ss_res / ss_tot
    return RateFit(float(slope), float(intercept), r2)


# ---------------------------------------------------------------------------
# SVG


_W, _H = 640.0, 480.0
_ML, _MR, _MT, _MB = 70.0, 20.0, 30.0, 50.0
_COLORS = ("#1f6fb2", "#b2451f", "#3a8c3a", "#7a3ab2", "#b2971f", "#1fb2a5")


def _f(v: float) -> str:
    return f"{v:.6f}"


def _ticks(lo: float, hi: float, log: bool) -> list[float]:
    if log:
        lo_e = math.floor(math.log10(lo))
        hi_e = math.ceil(math.log10(hi))
        return [10.0**e for e in range(int(lo_e), int(hi_e) + 1)]
    span = hi - lo
    if span <= 0:
        return [lo]
    step = 10.0 ** math.floor(math.log10(span / 4.0))
    while span / step > 8:
        step *= 2.0
    first = math.ceil(lo / step) * step
    out = []
    v = first
    while v <= hi + 1e-12 * span:
        out.append(v)
        v += step
    return out


def svg_plot(path, series, xlabel: str, ylabel: str,
             logx: bool = True, logy: bool = True, lines=None):
    """Scatter plot with optional straight reference lines.

    series: list of (label, xs, ys); lines: list of (label, slope, intercept)
    in the transformed coordinates (natural log when the axis is logarithmic).
    """
    xs_all, ys_all = [], []
    for _, xs, ys in series:
        xs_all.extend(float(x) for x in xs)
        ys_all.extend(float(y) for y in ys)
    if not xs_all:
        raise ValueError("svg_plot needs at least one point")

    def tx(v: float) -> float:
        return math.log(v) if logx else v

    def ty(v: float) -> float:
        return math.log(v) if logy else v

    x_lo, x_hi = min(map(tx, xs_all)), max(map(tx, xs_all))
    y_lo, y_hi = min(map(ty, ys_all)), max(map(ty, ys_all))
    x_pad = 0.05 * (x_hi - x_lo or 1.0)
    y_pad = 0.05 * (y_hi - y_lo or 1.0)
    x_lo, x_hi = x_lo - x_pad, x_hi + x_pad
    y_lo, y_hi = y_lo - y_pad, y_hi + y_pad

    def px(v: float) -> float:
        return _ML + (v - x_lo) / (x_hi - x_lo) * (_W - _ML - _MR)

    def py(v: float) -> float:
        return _H - _MB - (v - y_lo) / (y_hi - y_lo) * (_H - _MT - _MB)

    parts = [
        f'<svg xmlns="http://www.w3.org/2000/svg" width="{int(_W)}" '
        f'height="{int(_H)}" viewBox="0 0 {int(_W)} {int(_H)}">',
        f'<rect x="0" y="0" width="{int(_W)}" height="{int(_H)}" fill="white"/>',
        f'<line x1="{_f(_ML)}" y1="{_f(_H - _MB)}" x2="{_f(_W - _MR)}" '
        f'y2="{_f(_H - _MB)}" stroke="black"/>',
        f'<line x1="{_f(_ML)}" y1="{_f(_MT)}" x2="{_f(_ML)}" '
        f'y2="{_f(_H - _MB)}" stroke="black"/>',
    ]
    for v in _ticks(math.exp(x_lo) if logx else x_lo,
                    math.exp(x_hi) if logx else x_hi, logx):
        t = tx(v)
        if t < x_lo or t > x_hi:
            continue
        parts.append(f'<line x1="{_f(px(t))}" y1="{_f(_H - _MB)}" '
                     f'x2="{_f(px(t))}" y2="{_f(_H - _MB + 5)}" stroke="black"/>')
        parts.append(f'<text x="{_f(px(t))}" y="{_f(_H - _MB + 18)}" '
                     f'font-size="11" text-anchor="middle">{v:.3g}</text>')
    for v in _ticks(math.exp(y_lo) if logy else y_lo,
                    math.exp(y_hi) if logy else y_hi, logy):
        t = ty(v)
        if t < y_lo or t > y_hi:
            continue
        parts.append(f'<line x1="{_f(_ML - 5)}" y1="{_f(py(t))}" '
                     f'x2="{_f(_ML)}" y2="{_f(py(t))}" stroke="black"/>')
        parts.append(f'<text x="{_f(_ML - 8)}" y="{_f(py(t) + 4)}" '
                     f'font-size="11" text-anchor="end">{v:.3g}</text>')
    parts.append(f'<text x="{_f((_ML + _W - _MR) / 2)}" y="{_f(_H - 12)}" '
                 f'font-size="13" text-anchor="middle">{xlabel}</text>')
    parts.append(f'<text x="16" y="{_f((_MT + _H - _MB) / 2)}" font-size="13" '
                 f'text-anchor="middle" transform="rotate(-90 16 '
                 f'{_f((_MT + _H - _MB) / 2)})">{ylabel}</text>')

    for k, (label, xs, ys) in enumerate(series):
        color = _COLORS[k % len(_COLORS)]
        pts = " ".join(f"{_f(px(tx(float(x))))},{_f(py(ty(float(y))))}"
                       for x, y in zip(xs, ys))
        parts.append(f'<polyline points="{pts}" fill="none" stroke="{color}" '
                     f'stroke-width="1" stroke-dasharray="2,3"/>')
        for x, y in zip(xs, ys):
            parts.append(f'<circle cx="{_f(px(tx(float(x))))}" '
                         f'cy="{_f(py(ty(float(y))))}" r="3" fill="{color}"/>')
        parts.append(f'<text x="{_f(_W - _MR - 6)}" y="{_f(_MT + 14 + 14 * k)}" '
                     f'font-size="12" text-anchor="end" fill="{color}">{label}</text>')

    for k, (label, slope, intercept) in enumerate(lines or []):
        color = "#555555"
        y1 = slope * x_lo + intercept
        y2 = slope * x_hi + intercept
        parts.append(f'<line x1="{_f(px(x_lo))}" y1="{_f(py(y1))}" '
                     f'x2="{_f(px(x_hi))}" y2="{_f(py(y2))}" '
                     f'stroke="{color}" stroke-width="1"/>')
        parts.append(f'<text x="{_f(_ML + 6)}" y="{_f(_MT + 14 + 14 * k)}" '
                     f'font-size="12" fill="{color}">{label}</text>')

    parts.append("</svg>")
    with open(path, "w") as fh:
        fh.write("\n".join(parts) + "\n")


def svg_mesh(path, mesh):
    """Wireframe plot of a triangulation."""
    v = mesh.vertices
    x_lo, y_lo = v.min(axis=0)
    x_hi, y_hi = v.max(axis=0)
    span = max(x_hi - x_lo, y_hi - y_lo, 1e-12)
    size = 600.0
    pad = 20.0

    def px(x: float) -> float:
        return pad + (x - x_lo) / span * size

    def py(y: float) -> float:
        return pad + size - (y - y_lo) / span * size

    edges = set()
    for a, b, c in mesh.triangles:
        for i, j in ((a, b), (b, c), (c, a)):
            edges.add((min(i, j), max(i, j)))
    parts = [
        f'<svg xmlns="http://www.w3.org/2000/svg" width="{int(size + 2 * pad)}" '
        f'height="{int(size + 2 * pad)}" '
        f'viewBox="0 0 {int(size + 2 * pad)} {int(size + 2 * pad)}">',
        f'<rect width="100%" height="100%" fill="white"/>',
    ]
    for i, j in sorted(edges):
        parts.append(
            f'<line x1="{_f(px(v[i, 0]))}" y1="{_f(py(v[i, 1]))}" '
            f'x2="{_f(px(v[j, 0]))}" y2="{_f(py(v[j, 1]))}" '
            f'stroke="#333333" stroke-width="0.4"/>'
        )
    for i, j, tag in mesh.boundary_edges:
        color = "#b2451f" if tag.startswith("d0:") else "#1f6fb2"
        parts.append(
            f'<line x1="{_f(px(v[i, 0]))}" y1="{_f(py(v[i, 1]))}" '
            f'x2="{_f(px(v[j, 0]))}" y2="{_f(py(v[j, 1]))}" '
            f'stroke="{color}" stroke-width="1.2"/>'
        )
    parts.append("</svg>")
    with open(path, "w") as fh:
        fh.write("\n".join(parts) + "\n")
