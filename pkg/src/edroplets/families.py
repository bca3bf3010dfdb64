"""Closed-form droplet families.

Each family is a one-parameter (or two-parameter) collection of exact
free-boundary equilibria described by a conformal map `phi` from the unit
disc onto the droplet's complement, together with its Schwarz function
`S` (the continuation of conj(phi) off the circle), a field function `F`
of unit modulus on the circle, and the combination `G = p*S + i*tau*F`
that satisfies the droplet boundary equation for the family's pressure and
surface-tension constants (p, tau).

All evaluators are rational in the disc coordinate and are built once per
family, with derivatives taken exactly by the quotient rule.  The Schwarz
function is always produced by coefficient-conjugated reflection of the map,
never typed in by hand; the classical printed forms serve as test oracles.

Conventions baked in here:
  * integration constants are dropped (maps are translated representatives);
  * the field functions equal the conjugate of the unit tangent for the
    clockwise traversal of the boundary, i.e. F = -conj(i w phi'/|phi'|)
    with theta increasing (`ORIENTATION_SIGN`).
"""

from __future__ import annotations

import cmath
import math
import warnings
from dataclasses import dataclass
from functools import lru_cache

import numpy as np
from numpy.polynomial import Polynomial

from .rational import Rational, reflected

__all__ = [
    "DropletFamily",
    "DropletModel",
    "BoundaryTrace",
    "ParameterRangeWarning",
    "PoleEvaluationError",
    "ClosedFormMismatchError",
    "ORIENTATION_SIGN",
    "KSV_UNIVALENCY",
    "TWOPOLE_UNIVALENCY",
    "MPOLE_UNIVALENCY",
    "circle",
    "mcleod",
    "ksv",
    "twopole",
    "mpole",
    "twopole_general",
    "phi",
    "phi_prime",
    "phi_second",
    "schwarz_hat",
    "schwarz_prime",
    "schwarz_second",
    "field_hat",
    "g_hat",
    "g_hat_prime",
    "constants",
    "mpole_constant",
    "make_model",
    "boundary_trace",
    "twopole_general_map",
    "q_limit_check",
    "interior_poles",
    "singularities",
]

# Sign relating the theta-increasing unit tangent i*w*phi'/|phi'| to the
# closed-form field functions on |w| = 1: F = ORIENTATION_SIGN * conj(tangent).
# phi maps the disc to the droplet's *complement*, so increasing theta runs
# the droplet boundary clockwise; the classical formulas use the opposite
# (positively oriented) arc length.
ORIENTATION_SIGN = -1

KSV_UNIVALENCY = (math.sqrt(5) - 1) / 2
TWOPOLE_UNIVALENCY = 1 / 3
MPOLE_UNIVALENCY = {
    2: 1 / 3,
    3: ((math.sqrt(2) - 1) / 4) ** (1 / 3),
    4: ((37 - 8 * math.sqrt(10)) / 135) ** 0.25,
}

_TAGS = ("circle", "mcleod", "ksv", "twopole", "mpole", "twopole_general")


class ParameterRangeWarning(UserWarning):
    """Family parameter lies outside the known validity range."""


class PoleEvaluationError(Exception):
    def __init__(self, w, nearest=None):
        self.w = w
        self.nearest = nearest
        loc = f" (nearest singularity {nearest})" if nearest is not None else ""
        super().__init__(f"evaluation at a pole: w = {w}{loc}")


class ClosedFormMismatchError(Exception):
    def __init__(self, max_deviation: float):
        self.max_deviation = max_deviation
        super().__init__(
            f"closed form mismatch: max deviation {max_deviation:.3e} exceeds tolerance"
        )


@dataclass(frozen=True)
class DropletFamily:
    """Tagged union naming one closed-form solution family."""

    tag: str
    c: float = 0.0
    q: float = 0.0
    m: int = 0

    def __post_init__(self):
        if self.tag not in _TAGS:
            raise ValueError(f"unknown family tag {self.tag!r}")
        c, q, m = self.c, self.q, self.m
        if self.tag == "ksv":
            if c < 0 or c >= 1:
                raise ValueError("ksv requires 0 <= c < 1")
            if c >= KSV_UNIVALENCY:
                warnings.warn(
                    f"ksv c={c} is at or past the univalency bound {KSV_UNIVALENCY:.6f}",
                    ParameterRangeWarning, stacklevel=3)
        elif self.tag == "twopole":
            if c <= 0 or c >= 1:
                raise ValueError("twopole requires 0 < c < 1")
            if c >= TWOPOLE_UNIVALENCY:
                warnings.warn(
                    f"twopole c={c} is at or past the univalency bound 1/3",
                    ParameterRangeWarning, stacklevel=3)
        elif self.tag == "mpole":
            if m < 2:
                raise ValueError("mpole requires m >= 2")
            if c <= 0 or c >= 1:
                raise ValueError("mpole requires 0 < c < 1")
            # Bounds are known for m <= 4 and increase with m, so the m=4
            # bound is a safe conservative region for larger m.
            bound = MPOLE_UNIVALENCY.get(m, MPOLE_UNIVALENCY[4])
            if c >= bound:
                msg = (f"mpole m={m} c={c} is at or past the univalency bound "
                       f"{bound:.6f}" if m in MPOLE_UNIVALENCY else
                       f"mpole m={m} has no known univalency bound; c={c} exceeds "
                       f"the m=4 bound {bound:.6f}")
                warnings.warn(msg, ParameterRangeWarning, stacklevel=3)
        elif self.tag == "twopole_general":
            if not (0 < q < c < 1):
                raise ValueError("twopole_general requires 0 < q < c < 1")
            warnings.warn(
                "twopole_general is exploratory: only map evaluation and the "
                "q->0 limit are supported", ParameterRangeWarning, stacklevel=3)

    def describe(self) -> dict:
        out = {"tag": self.tag}
        if self.tag in ("ksv", "twopole", "mpole", "twopole_general"):
            out["c"] = self.c
        if self.tag == "twopole_general":
            out["q"] = self.q
        if self.tag == "mpole":
            out["m"] = self.m
        return out


def circle() -> DropletFamily:
    return DropletFamily("circle")


def mcleod() -> DropletFamily:
    return DropletFamily("mcleod")


def ksv(c: float) -> DropletFamily:
    return DropletFamily("ksv", c=float(c))


def twopole(c: float) -> DropletFamily:
    return DropletFamily("twopole", c=float(c))


def mpole(m: int, c: float) -> DropletFamily:
    return DropletFamily("mpole", c=float(c), m=int(m))


def twopole_general(c: float, q: float) -> DropletFamily:
    return DropletFamily("twopole_general", c=float(c), q=float(q))


# --------------------------------------------------------------------------
# evaluator construction


@dataclass(frozen=True)
class _Evaluators:
    phi: Rational
    dphi: Rational
    d2phi: Rational
    schwarz: Rational
    dschwarz: Rational
    d2schwarz: Rational
    field: Rational | None
    g: Rational | None
    dg: Rational | None
    interior_poles: tuple
    singularities: tuple


def _mpole_field(m: int, c: float) -> Rational:
    # i*w*[(m-1)(icw)^m + 1]*[w^m - (m+1)(-ic)^m]
    #   / ([(m+1)(icw)^m - 1]*[w^m + (m-1)(-ic)^m])
    # Standalone power constants carry (-ic)^m, matching the reflected
    # Schwarz function; for even m this is the usual printed convention.
    icm = (1j * c) ** m
    micm = (-1j * c) ** m
    f1 = Polynomial([1.0] + [0.0] * (m - 1) + [(m - 1) * icm])      # (m-1)(icw)^m + 1
    f2 = Polynomial([-(m + 1) * micm] + [0.0] * (m - 1) + [1.0])    # w^m - (m+1)(-ic)^m
    g1 = Polynomial([-1.0] + [0.0] * (m - 1) + [(m + 1) * icm])     # (m+1)(icw)^m - 1
    g2 = Polynomial([(m - 1) * micm] + [0.0] * (m - 1) + [1.0])     # w^m + (m-1)(-ic)^m
    return Rational(1j * Polynomial([0.0, 1.0]) * f1 * f2, g1 * g2)


def _den_roots(*rationals: Rational) -> tuple:
    roots = []
    for r in rationals:
        if r is None:
            continue
        coef = r.den.coef
        if len(coef) > 1:
            roots.extend(np.roots(coef[::-1]))
    out = []
    for z in roots:
        if not any(abs(z - u) < 1e-6 for u in out):
            out.append(complex(z))
    return tuple(out)


@lru_cache(maxsize=128)
def _build(family: DropletFamily) -> _Evaluators:
    w_ = Polynomial([0.0, 1.0])
    tag, c, q, m = family.tag, family.c, family.q, family.m

    if tag == "circle":
        phi_r = Rational(1.0, w_)
        field = Rational(-1j * w_)
        g_poles: tuple = ()
    elif tag == "mcleod":
        # 1/w + (2/3) w - (1/27) w^3
        phi_r = Rational(Polynomial([27.0, 0.0, 18.0, 0.0, -1.0]), 27.0 * w_)
        # unit-modulus field: -(i/3)(3w^2 - 1)/(w (1 - w^2/3))
        field = Rational(Polynomial([1j, 0.0, -3j]), Polynomial([0.0, 3.0, 0.0, -1.0]))
        g_poles = ()
    elif tag == "ksv":
        phi_r = Rational(1.0, w_) - Rational(c, Polynomial([1.0, -c])) - Rational(c**2 * w_)
        field = Rational(
            -1j * Polynomial([c**2, -c, 1.0]) * Polynomial([1.0, -c]),
            Polynomial([1.0, -c, c**2]) * Polynomial([-c, 1.0]),
        )
        g_poles = (complex(c),) if c > 0 else ()
    elif tag == "twopole":
        phi_r = (Rational(-1.0, w_)
                 + Rational(4 * c, Polynomial([1.0, -c]))
                 - Rational(4 * c, Polynomial([1.0, c])))
        field = Rational(
            1j * w_ * Polynomial([3 * c**2, 0.0, 1.0]) * Polynomial([1.0, 0.0, -(c**2)]),
            Polynomial([1.0, 0.0, 3 * c**2]) * Polynomial([-(c**2), 0.0, 1.0]),
        )
        g_poles = (complex(c), complex(-c))
    elif tag == "mpole":
        icm = (1j * c) ** m
        micm = (-1j * c) ** m
        den = Polynomial([1.0] + [0.0] * (m - 1) + [(m - 1) * icm])
        num = Polynomial([(m - 1)] + [0.0] * (m - 1) + [(m + 1) ** 2 * icm])
        phi_r = Rational(num, (m - 1) * w_ * den)
        field = _mpole_field(m, c)
        rho = ((m - 1) * c**m) ** (1.0 / m)
        base = cmath.phase(-(m - 1) * micm) / m
        g_poles = tuple(
            rho * cmath.exp(1j * (base + 2 * math.pi * k / m)) for k in range(m)
        )
    elif tag == "twopole_general":
        a = (c - q) ** 2
        phi_r = (Rational(-1.0, w_)
                 + Rational(a / q, Polynomial([1.0, -q]))
                 + Rational(a / c, Polynomial([1.0, -c])))
        field = None
        g_poles = ()
    else:  # pragma: no cover
        raise AssertionError(tag)

    schwarz = reflected(phi_r)
    dphi = phi_r.deriv()
    if field is not None:
        p, tau = _constants(family)
        g = p * schwarz + (1j * tau) * field
        dg = g.deriv()
    else:
        g = dg = None
    sing = _den_roots(phi_r, schwarz, field, g)
    return _Evaluators(
        phi=phi_r,
        dphi=dphi,
        d2phi=dphi.deriv(),
        schwarz=schwarz,
        dschwarz=schwarz.deriv(),
        d2schwarz=schwarz.deriv().deriv(),
        field=field,
        g=g,
        dg=dg,
        interior_poles=g_poles,
        singularities=sing,
    )


def _constants(family: DropletFamily):
    tag, c, m = family.tag, family.c, family.m
    if tag == "circle":
        return 1.0, 1.0
    if tag == "mcleod":
        return 0.0, 3.0
    if tag == "ksv":
        return 1 - c**2, 1 - c**2 + c**4
    if tag == "twopole":
        return 1 - c**4, 6 * c**4 + 2
    if tag == "mpole":
        return (m - 1) * (1 - (m - 1) ** 2 * c ** (2 * m)), (2 * m**2 - 2) * c ** (2 * m) + 2
    raise ValueError(
        f"family {tag!r} has no (p, tau): it is not one of the enumerated solutions"
    )


# --------------------------------------------------------------------------
# models and public evaluation API


@dataclass(frozen=True)
class DropletModel:
    """A family together with its pressure/tension constants."""

    family: DropletFamily
    p: float
    tau: float

    def g_hat(self, w):
        ev = _build(self.family)
        canonical = _constants(self.family)
        if (self.p, self.tau) == canonical:
            return _eval(ev.g, w, self.family)
        return self.p * _eval(ev.schwarz, w, self.family) \
            + 1j * self.tau * _eval(ev.field, w, self.family)


def make_model(family: DropletFamily) -> DropletModel:
    p, tau = _constants(family)
    return DropletModel(family=family, p=p, tau=tau)


def _family_of(obj) -> DropletFamily:
    if isinstance(obj, DropletModel):
        return obj.family
    if isinstance(obj, DropletFamily):
        return obj
    raise TypeError(f"expected DropletFamily or DropletModel, got {type(obj)!r}")


def _eval(rat: Rational, w, family: DropletFamily):
    if rat is None:
        raise ValueError(f"operation not supported for family {family.tag!r}")
    w_arr = np.asarray(w, dtype=complex)
    vals = rat(w_arr)
    bad = ~np.isfinite(np.asarray(vals))
    if np.any(bad):
        wb = complex(np.atleast_1d(w_arr)[np.argmax(np.atleast_1d(bad))])
        sing = _build(family).singularities
        nearest = min(sing, key=lambda s: abs(s - wb)) if sing else None
        raise PoleEvaluationError(wb, nearest)
    if np.isscalar(w) or np.ndim(w) == 0:
        return complex(vals)
    return vals


def phi(family, w):
    """The family's conformal map from the punctured disc to the droplet complement."""
    fam = _family_of(family)
    return _eval(_build(fam).phi, w, fam)


def phi_prime(family, w):
    fam = _family_of(family)
    return _eval(_build(fam).dphi, w, fam)


def phi_second(family, w):
    fam = _family_of(family)
    return _eval(_build(fam).d2phi, w, fam)


def schwarz_hat(family, w):
    """Analytic continuation of conj(phi) off the unit circle."""
    fam = _family_of(family)
    return _eval(_build(fam).schwarz, w, fam)


def schwarz_prime(family, w):
    fam = _family_of(family)
    return _eval(_build(fam).dschwarz, w, fam)


def schwarz_second(family, w):
    fam = _family_of(family)
    return _eval(_build(fam).d2schwarz, w, fam)


def field_hat(family, w):
    """Field function, of unit modulus on the circle; F = -conj(tangent) there."""
    fam = _family_of(family)
    return _eval(_build(fam).field, w, fam)


def g_hat(family, w):
    """p*S + i*tau*F, analytic in the punctured disc for the family constants."""
    if isinstance(family, DropletModel):
        return family.g_hat(w)
    fam = _family_of(family)
    return _eval(_build(fam).g, w, fam)


def g_hat_prime(family, w):
    """Exact w-derivative of g_hat (canonical constants)."""
    fam = _family_of(family)
    return _eval(_build(fam).dg, w, fam)


def constants(family):
    """The family's (p, tau)."""
    return _constants(_family_of(family))


def interior_poles(family) -> tuple:
    """Locations inside the disc where S and F have poles (G's candidates)."""
    return _build(_family_of(family)).interior_poles


def singularities(family) -> tuple:
    """All finite denominator roots of the family's evaluators."""
    return _build(_family_of(family)).singularities


def mpole_constant(m: int, c: float, tol: float = 1e-11) -> float:
    """The overall constant A_m(c) in the m-pole combined function.

    Fitted at one regular point from p*S + i*tau*F divided by the rational
    shape  -w*(m+1 - (m-1)^2 (icw)^m) / ((m+1)(icw)^m - 1)  and verified at 64
    further sample points.
    """
    fam = mpole(m, c)
    ev = _build(fam)

    def shape(w):
        u = (1j * c * w) ** m
        return -w * (m + 1 - (m - 1) ** 2 * u) / ((m + 1) * u - 1)

    w0 = 0.41 + 0.13j
    a = ev.g(w0) / shape(w0)
    angles = 2 * np.pi * (np.arange(32) + 0.37) / 32
    pts = np.concatenate([0.35 * np.exp(1j * angles), 0.78 * np.exp(1j * angles)])
    dev = np.max(np.abs(ev.g(pts) / shape(pts) - a))
    if dev > tol * max(1.0, abs(a)):
        raise ClosedFormMismatchError(float(dev))
    if abs(a.imag) > tol * max(1.0, abs(a)):
        raise ClosedFormMismatchError(abs(a.imag))
    return float(a.real)


# --------------------------------------------------------------------------
# boundary traces


@dataclass(frozen=True)
class BoundaryTrace:
    """Sampled boundary curve phi(e^{i theta}) with tangents and curvature.

    The grid covers [-pi, pi] inclusive at both ends, so the point list closes
    up exactly; `polyline()` drops the duplicate.  Grid nodes where phi'
    vanishes are recorded in `degenerate_nodes` and carry NaN tangent data.
    """

    family: DropletFamily
    thetas: np.ndarray
    points: np.ndarray
    tangents: np.ndarray
    curvature: np.ndarray
    degenerate_nodes: tuple = ()

    @property
    def n(self) -> int:
        return len(self.thetas) - 1

    def polyline(self):
        from .numerics import Polyline

        return Polyline(self.points[:-1], closed=True)


def boundary_trace(model_or_family, n: int, with_curvature: bool = True) -> BoundaryTrace:
    """Uniform-in-theta boundary sample of the family's droplet."""
    if n < 64:
        raise ValueError("boundary_trace requires n >= 64")
    fam = _family_of(model_or_family)
    ev = _build(fam)
    thetas = np.linspace(-np.pi, np.pi, n + 1)
    w = np.exp(1j * thetas)
    pts = ev.phi(w)
    dph = ev.dphi(w)
    speed = np.abs(dph)
    degenerate = np.nonzero(speed < 1e-12 * max(1.0, speed.max()))[0]
    with np.errstate(invalid="ignore", divide="ignore"):
        tangents = 1j * w * dph / speed
    if with_curvature:
        from .geometry import curvature_hat

        curv = curvature_hat(fam, w, skip_nodes=degenerate)
    else:
        curv = np.full_like(thetas, np.nan)
    return BoundaryTrace(
        family=fam,
        thetas=thetas,
        points=pts,
        tangents=tangents,
        curvature=curv,
        degenerate_nodes=tuple(int(i) for i in degenerate),
    )


# --------------------------------------------------------------------------
# general two-pole map and its q->0 limit


def twopole_general_map(c: float, q: float, w):
    """Evaluate the exploratory two-parameter map phi_{c,q}."""
    fam = twopole_general(c, q)
    return phi(fam, w)


def q_limit_check(c: float, q: float, n: int = 2048) -> float:
    """Sup over |w|=1 of |phi_{c,q} - c^2/q + 2c - (-phi_ksv)|; O(q) as q -> 0."""
    if not (0 < q < c < 1):
        raise ValueError("q_limit_check requires 0 < q < c < 1")
    w = np.exp(1j * np.linspace(-np.pi, np.pi, n, endpoint=False))
    with warnings.catch_warnings():
        warnings.simplefilter("ignore", ParameterRangeWarning)
        general = twopole_general_map(c, q, w)
        ksv_vals = phi(ksv(c), w)
    shifted = general - c**2 / q + 2 * c
    return float(np.max(np.abs(shifted + ksv_vals)))
