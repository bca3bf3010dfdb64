"""Boundary geometry: curvature, convexity, univalency, line profiles, width.

Curvature comes from the exact local formula

    kappa(w) = Re[ (w phi' / (2 |phi'|)) * ( S''/(S' phi') - phi''/phi'^2 ) ],

which is the signed-curvature expression in the disc coordinate with the
square-root branch resolved through the boundary identity
S'(w) = -conj(phi'(w))/w^2, so that the circle has curvature +1.  Thresholds
in the family parameter are recovered by bisection: convexity on the sign of
the closed-form curvature numerator, univalency on polyline simplicity of the
boundary trace.
"""

from __future__ import annotations

import math
import warnings
from dataclasses import dataclass, field

import numpy as np

from . import families as fam_mod
from .families import (
    DropletFamily,
    DropletModel,
    ParameterRangeWarning,
    _build,
    _family_of,
    boundary_trace,
    ksv,
    mpole,
    twopole,
)
from .numerics import BracketError, bisect_threshold, polyline_is_simple

__all__ = [
    "GeometryReport",
    "BranchError",
    "TangencyError",
    "WidthDisagreementError",
    "KSV_CONVEXITY",
    "TWOPOLE_CONVEXITY",
    "curvature_hat",
    "curvature_numeric",
    "ksv_curvature_formula",
    "twopole_curvature_formula",
    "convexity_threshold",
    "univalency_threshold",
    "vertical_line_profile",
    "droplet_width",
    "width_from_trace",
    "stage_classification",
    "ksv_alpha",
    "geometry_report",
]

KSV_CONVEXITY = (3 - math.sqrt(5)) / 2
TWOPOLE_CONVEXITY = math.sqrt(6 * math.sqrt(13) - 21) / 3


class BranchError(Exception):
    pass


class TangencyError(Exception):
    """A requested line is within tolerance of tangency; the count is inconclusive."""


class WidthDisagreementError(Exception):
    pass


def curvature_hat(model_or_family, w, skip_nodes=()):
    """Signed curvature of the boundary at w on the unit circle.

    Positive for convex droplets (circle == +1).  Raises BranchError if the
    evaluated expression fails to be real to 1e-10.
    """
    fam = _family_of(model_or_family)
    ev = _build(fam)
    w = np.asarray(w, dtype=complex)
    scalar = w.ndim == 0
    w = np.atleast_1d(w)
    if np.any(np.abs(np.abs(w) - 1) > 1e-9):
        raise ValueError("curvature_hat is defined on the unit circle only")
    dphi = ev.dphi(w)
    d2phi = ev.d2phi(w)
    ds = ev.dschwarz(w)
    d2s = ev.d2schwarz(w)
    with np.errstate(invalid="ignore", divide="ignore"):
        val = (w * dphi / (2 * np.abs(dphi))) * (d2s / (ds * dphi) - d2phi / dphi**2)
    mask = np.zeros(w.shape, dtype=bool)
    if len(skip_nodes):
        mask[np.asarray(skip_nodes, dtype=int)] = True
    live = ~mask
    bad = np.abs(val[live].imag) > 1e-10 * np.maximum(1.0, np.abs(val[live]))
    if np.any(bad):
        wb = w[live][np.argmax(bad)]
        raise BranchError(
            f"curvature not real at w={complex(wb)}: value {val[live][np.argmax(bad)]}"
        )
    out = np.where(mask, np.nan, val.real)
    return float(out[0]) if scalar else out


def curvature_numeric(trace) -> np.ndarray:
    """Finite-difference curvature of a boundary trace.

    Second-order central differences in theta on the closed trace; the sign
    matches `curvature_hat` (positive for convex droplets).
    """
    if trace.n < 1024:
        raise ValueError("curvature_numeric requires a trace with n >= 1024")
    z = trace.points[:-1]
    h = trace.thetas[1] - trace.thetas[0]
    spacing = np.abs(np.roll(z, -1) - z)
    if np.min(spacing) < 1e-15 * max(1.0, float(np.max(spacing))):
        raise ValueError("degenerate node spacing in trace")
    zp = (np.roll(z, -1) - np.roll(z, 1)) / (2 * h)
    zpp = (np.roll(z, -1) - 2 * z + np.roll(z, 1)) / h**2
    kappa = -np.imag(np.conj(zp) * zpp) / np.abs(zp) ** 3
    return np.append(kappa, kappa[0])


def ksv_curvature_formula(c: float, theta) -> np.ndarray:
    """Closed-form boundary curvature of the one-pole family (circle +1)."""
    t = np.cos(np.asarray(theta, dtype=float))
    num = (c**2 - 1) * ((4 * c**3 + 4 * c) * t - c**4 - 5 * c**2 - 1)
    den = (4 * c**2 * t**2 - (2 * c**3 + 2 * c) * t + c**4 - c**2 + 1) ** 2
    return num / den


def twopole_curvature_formula(c: float, theta) -> np.ndarray:
    """Closed-form boundary curvature of the two-pole family.

    As classically printed this expression carries the opposite orientation
    (circle limit -1); it is negated here so the circle has curvature +1,
    matching `curvature_hat`.
    """
    t2 = np.cos(np.asarray(theta, dtype=float)) ** 2
    num = (48 * c**4 * t2**2 + (24 * c**2 - 48 * c**4 - 72 * c**6) * t2
           - 9 * c**8 + 36 * c**6 + 34 * c**4 - 12 * c**2 - 1)
    den = (12 * c**2 * t2 + 9 * c**4 - 6 * c**2 + 1) ** 2
    return -num / den


def _ksv_convex(c: float) -> bool:
    # numerator polynomial p(t) = (4c^3+4c) t - (c^4+5c^2+1); linear in t,
    # so endpoint signs decide positivity of the curvature on the whole circle
    p = lambda t: (4 * c**3 + 4 * c) * t - (c**4 + 5 * c**2 + 1)
    return p(1.0) < 0 and p(-1.0) < 0


def _twopole_convex(c: float) -> bool:
    # quartic even numerator; endpoint checks p(0) < 0, p(1) < 0 suffice
    def p(t):
        return (48 * c**4 * t**4 + (24 * c**2 - 48 * c**4 - 72 * c**6) * t**2
                - 9 * c**8 + 36 * c**6 + 34 * c**4 - 12 * c**2 - 1)

    return p(0.0) < 0 and p(1.0) < 0


def _mpole_convex(m: int, c: float, n: int = 4096) -> bool:
    with warnings.catch_warnings():
        warnings.simplefilter("ignore", ParameterRangeWarning)
        fam = mpole(m, c)
        theta = np.linspace(0, 2 * np.pi, n, endpoint=False)
        kappa = curvature_hat(fam, np.exp(1j * theta))
    return bool(np.min(kappa) > 0)


def convexity_threshold(family, tol: float = 1e-10, bracket=None) -> float:
    """Largest c below which the family's droplets are convex."""
    fam = _family_of(family)
    if fam.tag == "ksv":
        predicate, default = _ksv_convex, (0.1, 0.5)
    elif fam.tag == "twopole":
        predicate, default = _twopole_convex, (0.1, 0.32)
    elif fam.tag == "mpole":
        m = fam.m
        predicate, default = (lambda c: _mpole_convex(m, c)), (0.05, 0.48)
    else:
        raise ValueError(f"no convexity threshold for family {fam.tag!r}")
    lo, hi = bracket if bracket is not None else default
    return bisect_threshold(predicate, lo, hi, tol)


_UNIVALENCY_BRACKETS = {
    ("ksv", 0): (0.55, 0.68),
    ("twopole", 0): (0.30, 0.37),
    ("mpole", 2): (0.30, 0.37),
    ("mpole", 3): (0.43, 0.51),
    ("mpole", 4): (0.50, 0.58),
}


def _trace_is_simple(fam_at, c: float, n: int) -> bool:
    with warnings.catch_warnings():
        warnings.simplefilter("ignore", ParameterRangeWarning)
        trace = boundary_trace(fam_at(c), n, with_curvature=False)
    return bool(polyline_is_simple(trace.polyline()))


def univalency_threshold(family, tol: float = 1e-5, bracket=None,
                         max_nodes: int = 1 << 16):
    """Largest c below which the boundary trace stays a simple curve.

    The trace resolution escalates as the bisection bracket narrows.  If the
    simplicity verdict at the endpoints is still inconclusive at `max_nodes`,
    the current bracket (lo, hi) is returned instead of a point.
    """
    fam = _family_of(family)
    key = (fam.tag, fam.m if fam.tag == "mpole" else 0)
    if bracket is None:
        if key not in _UNIVALENCY_BRACKETS:
            raise ValueError(f"no default univalency bracket for {key}; pass bracket=")
        bracket = _UNIVALENCY_BRACKETS[key]
    lo, hi = bracket

    if fam.tag == "mpole":
        m = fam.m
        fam_at = lambda c: mpole(m, c)
    elif fam.tag == "ksv":
        fam_at = ksv
    elif fam.tag == "twopole":
        fam_at = twopole
    else:
        raise ValueError(f"no univalency threshold for family {fam.tag!r}")

    def nodes_for(width: float) -> int:
        if width > 3e-3:
            return min(max_nodes, 1 << 12)
        if width > 3e-4:
            return min(max_nodes, 1 << 14)
        return max_nodes

    if not _trace_is_simple(fam_at, lo, nodes_for(hi - lo)):
        raise BracketError(f"curve already non-simple at bracket low end c={lo}")
    if _trace_is_simple(fam_at, hi, nodes_for(hi - lo)):
        raise BracketError(f"curve still simple at bracket high end c={hi}")
    while hi - lo > tol:
        mid = 0.5 * (lo + hi)
        if _trace_is_simple(fam_at, mid, nodes_for(hi - lo)):
            lo = mid
        else:
            hi = mid
    # confirm the verdict straddles the returned value at full resolution
    value = 0.5 * (lo + hi)
    ok_lo = _trace_is_simple(fam_at, max(value - 2 * tol, 0.0), max_nodes)
    ok_hi = not _trace_is_simple(fam_at, value + 2 * tol, max_nodes)
    if not (ok_lo and ok_hi):
        return (lo, hi)
    return value


def vertical_line_profile(family, c: float, a: float, n: int = 8192,
                          tangency_tol: float = 1e-9) -> int:
    """Number of intersections of the boundary with the line Re z = a.

    Counts sign changes of x(theta) - a around the closed trace.  If `a` is
    within `tangency_tol` of a local extremum value of x(theta), the count is
    inconclusive and TangencyError is raised.
    """
    fam = _family_of(family)
    if fam.tag == "ksv":
        fam_c = ksv(c)
    elif fam.tag == "twopole":
        fam_c = twopole(c)
    else:
        raise ValueError("line profiles are defined for the ksv and twopole families")
    with warnings.catch_warnings():
        warnings.simplefilter("ignore", ParameterRangeWarning)
        trace = boundary_trace(fam_c, n, with_curvature=False)
    x = trace.points[:-1].real
    # tangency guard: distance from a to any discrete local extremum of x
    left = np.roll(x, 1)
    right = np.roll(x, -1)
    is_ext = ((x >= left) & (x >= right)) | ((x <= left) & (x <= right))
    if np.any(np.abs(x[is_ext] - a) < tangency_tol):
        raise TangencyError(f"line Re z = {a} is within {tangency_tol} of tangency")
    s = np.sign(x - a)
    if np.any(s == 0):
        raise TangencyError(f"trace node exactly on the line Re z = {a}")
    return int(np.sum(s != np.roll(s, -1)))


def width_from_trace(trace) -> float:
    """Horizontal extent of a trace, refined by parabolic interpolation in theta."""
    x = trace.points[:-1].real
    h = trace.thetas[1] - trace.thetas[0]

    def refined(values):
        i = int(np.argmax(values))
        f0, f1, f2 = values[i - 1], values[i], values[(i + 1) % len(values)]
        denom = f0 - 2 * f1 + f2
        if denom == 0:
            return f1
        delta = 0.5 * (f0 - f2) / denom
        return f1 - 0.25 * (f0 - f2) * delta

    return float(refined(x) + refined(-x))


def twopole_width_formula(c: float) -> float:
    """2 a*, the maximum horizontal width of the two-pole droplet."""
    astar = (-4 * c + math.sqrt(-27 * c**8 + 18 * c**4 + 8 * c**2 + 1)) \
        / (2 * (c**2 + 1) * c)
    return 2 * astar


@dataclass(frozen=True)
class WidthResult:
    width_trace: float
    width_formula: float | None

    @property
    def width(self) -> float:
        return self.width_trace


def droplet_width(family, c: float, n: int = 1 << 15, tol: float = 1e-8) -> WidthResult:
    """Two-pole droplet width, from the tangency formula and the trace extent.

    In the formula regime c1 < c < 1/3 the two values must agree to `tol`;
    disagreement raises WidthDisagreementError.  Below c1 only the trace value
    is returned.
    """
    fam = _family_of(family)
    if fam.tag != "twopole":
        raise ValueError("droplet_width is defined for the twopole family")
    trace = boundary_trace(twopole(c), n, with_curvature=False)
    w_trace = width_from_trace(trace)
    if c > TWOPOLE_CONVEXITY:
        w_formula = twopole_width_formula(c)
        if abs(w_formula - w_trace) > tol:
            raise WidthDisagreementError(
                f"width formula {w_formula!r} vs trace extent {w_trace!r} "
                f"differ by {abs(w_formula - w_trace):.3e}"
            )
        return WidthResult(w_trace, w_formula)
    return WidthResult(w_trace, None)


def ksv_alpha(c: float) -> float:
    """cos(theta) of the secondary crossings of Re z = x(0) for the one-pole family."""
    return (c**4 - 2 * c**3 + c**2 - 2 * c + 1) / (2 * c * (c**2 - 2 * c + 1))


def stage_classification(family, c: float) -> str:
    """Evolution stage I/II/III of the droplet shape at parameter c."""
    fam = _family_of(family)
    if fam.tag == "ksv":
        c1, cstar = KSV_CONVEXITY, fam_mod.KSV_UNIVALENCY
    elif fam.tag == "twopole":
        c1, cstar = TWOPOLE_CONVEXITY, fam_mod.TWOPOLE_UNIVALENCY
    else:
        raise ValueError("stage classification applies to ksv and twopole")
    if c < c1:
        return "I"
    if c < cstar:
        return "II"
    return "III"


@dataclass(frozen=True)
class GeometryReport:
    family: dict
    convexity_threshold: float
    univalency_threshold: float | tuple
    width: float | None = None
    stage: str | None = None
    regression_note: str | None = None

    def to_dict(self) -> dict:
        out = {
            "family": self.family,
            "convexity_threshold": self.convexity_threshold,
            "univalency_threshold": self.univalency_threshold,
        }
        if self.width is not None:
            out["width"] = self.width
        if self.stage is not None:
            out["stage"] = self.stage
        if self.regression_note is not None:
            out["regression_note"] = self.regression_note
        return out


def geometry_report(family, c: float | None = None,
                    univalency_tol: float = 1e-5) -> GeometryReport:
    """Thresholds (and, when c is given, stage/width) for one family."""
    fam = _family_of(family)
    conv = convexity_threshold(fam)
    univ = univalency_threshold(fam, tol=univalency_tol)
    width = None
    stage = None
    note = None
    if fam.tag == "twopole" and c is not None:
        width = droplet_width(fam, c).width
    if fam.tag in ("ksv", "twopole") and c is not None:
        stage = stage_classification(fam, c)
    if fam.tag == "mpole":
        note = "convexity threshold has no closed-form reference; value is a regression constant"
    return GeometryReport(
        family=fam.describe(),
        convexity_threshold=conv,
        univalency_threshold=univ,
        width=width,
        stage=stage,
        regression_note=note,
    )
