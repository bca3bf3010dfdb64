"""Deterministic file emitters: CSV, JSON, SVG paths, and matplotlib figures.

CSV and SVG numbers are written with 15 significant digits and no run-varying
metadata, so identical inputs produce byte-identical files.  PNG rendering via
matplotlib is the figure companion to the delimited output and is not covered
by the byte-determinism contract.
"""

from __future__ import annotations

import json
import os
from dataclasses import dataclass

import numpy as np

from . import __version__

__all__ = [
    "fmt",
    "write_csv",
    "trace_rows",
    "write_json",
    "CurveSet",
    "write_svg",
    "render_png",
    "default_outdir",
]

OUTDIR_ENV = "EDROPLETS_OUTDIR"


def default_outdir() -> str:
    return os.environ.get(OUTDIR_ENV, ".")


def fmt(value) -> str:
    """15-significant-digit text for a float; NaN spelled 'nan'."""
    v = float(value)
    return f"{v:.15g}"


def write_csv(path: str, header, rows) -> None:
    lines = [",".join(header)]
    for row in rows:
        lines.append(",".join(fmt(v) if not isinstance(v, str) else v for v in row))
    with open(path, "w", newline="") as fh:
        fh.write("\n".join(lines) + "\n")


def trace_rows(trace):
    """(theta, x, y, curvature) rows of a boundary trace."""
    for th, z, k in zip(trace.thetas, trace.points, trace.curvature):
        yield (th, z.real, z.imag, k)


def write_json(path: str | None, obj) -> str:
    text = json.dumps(obj, indent=2, sort_keys=True, allow_nan=True) + "\n"
    if path is not None:
        with open(path, "w") as fh:
            fh.write(text)
    return text


@dataclass(frozen=True)
class CurveSet:
    """Curves to plot: (label, points) pairs plus identifying metadata."""

    curves: tuple  # ((label, complex ndarray), ...)
    metadata: str  # e.g. "family=ksv c=0.1,0.3 n=1024"

    def bounds(self):
        pts = np.concatenate([c for _, c in self.curves])
        return (
            float(np.min(pts.real)), float(np.max(pts.real)),
            float(np.min(pts.imag)), float(np.max(pts.imag)),
        )


def write_svg(path: str, curveset: CurveSet, size: int = 640,
              viewbox=None) -> None:
    """One <path> element per curve inside a fixed viewbox.

    A caller-supplied viewbox keeps the coordinate scale identical across a
    parameter sweep so shape evolution is visually comparable.
    """
    if viewbox is None:
        x0, x1, y0, y1 = curveset.bounds()
        pad = 0.05 * max(x1 - x0, y1 - y0, 1e-9)
        viewbox = (x0 - pad, x1 + pad, y0 - pad, y1 + pad)
    x0, x1, y0, y1 = viewbox
    w = x1 - x0
    h = y1 - y0
    lines = [
        f'<svg xmlns="http://www.w3.org/2000/svg" width="{size}" '
        f'height="{size}" viewBox="{fmt(x0)} {fmt(-y1)} {fmt(w)} {fmt(h)}">',
        f"<!-- {curveset.metadata} tool=edroplets {__version__} -->",
    ]
    palette = ["#1f77b4", "#d62728", "#2ca02c", "#9467bd", "#ff7f0e",
               "#8c564b", "#e377c2", "#7f7f7f"]
    stroke = 0.004 * max(w, h)
    for i, (label, pts) in enumerate(curveset.curves):
        # SVG y runs downward; flip the imaginary axis
        coords = " ".join(f"{fmt(z.real)},{fmt(-z.imag)}" for z in pts)
        d = "M " + coords + " Z"
        color = palette[i % len(palette)]
        lines.append(
            f'<path id="{label}" d="{d}" fill="none" stroke="{color}" '
            f'stroke-width="{fmt(stroke)}"/>'
        )
    lines.append("</svg>")
    with open(path, "w") as fh:
        fh.write("\n".join(lines) + "\n")


def render_png(path: str, curveset: CurveSet, dpi: int = 150) -> None:
    """Matplotlib rendering of the same curves, one figure file."""
    import matplotlib

    matplotlib.use("Agg")
    import matplotlib.pyplot as plt

    fig, ax = plt.subplots(figsize=(6, 6))
    for label, pts in curveset.curves:
        ax.plot(pts.real, pts.imag, lw=1.2, label=label)
    ax.set_aspect("equal")
    ax.grid(True, alpha=0.3)
    ax.set_title(curveset.metadata, fontsize=9)
    if len(curveset.curves) > 1:
        ax.legend(fontsize=8, loc="upper right")
    fig.savefig(path, dpi=dpi, bbox_inches="tight")
    plt.close(fig)
