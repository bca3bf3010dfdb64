"""Two-component droplet machinery on the annulus r < |w| < 1.

Builds on the truncated prime function

    P(z) = (1 - z) * prod_{k>=1} (1 - r^{2k} z)(1 - r^{2k}/z),

its positive boundary ratios f_AB, and Jacobi theta evaluators.  The module is
exploratory by design: no operation asserts that a two-component solution
exists; the period scan and boundary traces emit diagnostics only.

The candidate derivative has two independent implementations: the prime-
function product form, and the same product with every P factor rewritten
through the theta representation P(z) = -i sqrt(z) Theta1(-(i/2) log z, r) /
r^{1/4} (the unknown normalization constant of that identity cancels from the
ratio, so the two forms agree exactly, not just up to scale).
"""

from __future__ import annotations

import math
from dataclasses import dataclass

import numpy as np

from .numerics import CircleLoop, Polyline, integrate_loop

__all__ = [
    "AnnulusConfig",
    "PrimeFactor",
    "prime_P",
    "prime_P_theta",
    "f_AB",
    "theta1",
    "theta2",
    "theta_prime_consistency",
    "annulus_phi_prime",
    "annulus_singularities",
    "annulus_periods",
    "annulus_boundary_trace",
    "AnnulusTraces",
]


@dataclass(frozen=True)
class AnnulusConfig:
    """Annulus modulus r, pole parameter x, and the prime-series truncation.

    The truncation K is derived from the tail bound
    r^{2K} * (B + 1/B + 2) / (1 - r^2) < eps with B the largest argument
    modulus the evaluators use (arguments stay within [r^2, 1/r^2]).
    """

    r: float
    x: float | None = None
    eps: float = 1e-14

    def __post_init__(self):
        if not 0 < self.r < 1:
            raise ValueError("modulus r must lie in (0, 1)")
        if self.x is not None and not self.r < self.x < 1:
            raise ValueError("pole parameter x must lie in (r, 1)")
        if not 0 < self.eps < 1e-2:
            raise ValueError("series tolerance eps out of range")

    @property
    def truncation(self) -> int:
        b = 1.0 / self.r**2
        bound = (b + 1.0 / b + 2.0) / (1.0 - self.r**2)
        k = math.ceil(math.log(self.eps / bound) / (2 * math.log(self.r)))
        return max(1, min(int(k), 4000))

    def require_x(self) -> float:
        if self.x is None:
            raise ValueError("this operation needs the pole parameter x")
        return self.x


@dataclass(frozen=True)
class PrimeFactor:
    """Zero A and pole B of a boundary-positive annulus ratio f_AB."""

    A: complex
    B: complex

    def ratio_is_positive(self) -> bool:
        q = np.conj(self.A) / np.conj(self.B)
        return abs(q.imag) < 1e-12 * abs(q) and q.real > 0


def prime_P(z, config: AnnulusConfig):
    """Truncated prime function; truncation error below config.eps."""
    z = np.asarray(z, dtype=complex)
    scalar = z.ndim == 0
    z = np.atleast_1d(z)
    if np.any(z == 0):
        raise ZeroDivisionError("prime function is singular at z = 0")
    out = 1 - z
    r2 = config.r**2
    q = r2
    for _ in range(config.truncation):
        out = out * (1 - q * z) * (1 - q / z)
        q *= r2
    return complex(out[0]) if scalar else out


def f_AB(z, factor: PrimeFactor, config: AnnulusConfig):
    """The annulus ratio P(z/A) P(conj(A) z) / (P(z/B) P(conj(B) z)); 1 when A == B."""
    z = np.asarray(z, dtype=complex)
    scalar = z.ndim == 0
    z = np.atleast_1d(z)
    if factor.A == factor.B:
        ones = np.ones_like(z)
        return complex(ones[0]) if scalar else ones
    num = prime_P(z / factor.A, config) * prime_P(np.conj(factor.A) * z, config)
    den = prime_P(z / factor.B, config) * prime_P(np.conj(factor.B) * z, config)
    if np.any(den == 0):
        raise ZeroDivisionError("f_AB evaluated at a pole")
    out = num / den
    return complex(out[0]) if scalar else out


def _theta_series(v, nome: float, signs: bool, eps: float = 1e-15, nmax: int = 400):
    v = np.asarray(v, dtype=complex)
    scalar = v.ndim == 0
    v = np.atleast_1d(v)
    total = np.zeros_like(v)
    for n in range(nmax):
        coeff = nome ** ((n + 0.5) ** 2)
        term = coeff * (np.sin((2 * n + 1) * v) if signs else np.cos((2 * n + 1) * v))
        if signs and n % 2:
            term = -term
        total = total + term
        if np.all(np.abs(term) < eps * (np.abs(total) + 1.0)) and n >= 2:
            break
    out = 2 * total
    return complex(out[0]) if scalar else out


def theta1(v, nome: float):
    """First Jacobi theta function, sine q-series."""
    if not abs(nome) < 1:
        raise ValueError("|nome| must be < 1")
    return _theta_series(v, nome, signs=True)


def theta2(v, nome: float):
    """Second Jacobi theta function, cosine q-series."""
    if not abs(nome) < 1:
        raise ValueError("|nome| must be < 1")
    return _theta_series(v, nome, signs=False)


def prime_P_theta(z, config: AnnulusConfig):
    """P via the theta representation, normalization constant set to 1.

    P(z) = -i e^{tau/2}... written directly in z: -i sqrt(z) *
    Theta1(-(i/2) log z, r) / r^{1/4}, principal logarithm.  Branch shifts of
    the logarithm flip sqrt(z) and Theta1 together, so the value is
    single-valued.
    """
    z = np.asarray(z, dtype=complex)
    lz = np.log(z)
    return -1j * np.exp(lz / 2) * theta1(-0.5j * lz, config.r) / config.r**0.25


def theta_prime_consistency(config: AnnulusConfig, n_samples: int = 32,
                            radii=None, seed: int = 17) -> float:
    """Constancy of rho(w) = P(w) e^{tau/2} / Theta1(i tau/2, r), tau = -log w.

    The normalization constant of the theta representation is unknown, so the
    testable statement is that rho is the same at every sample point; returned
    is max |rho/rho_0 - 1|.
    """
    rng = np.random.default_rng(seed)
    if radii is None:
        radii = (config.r ** (1 / 3), config.r ** (2 / 3))
    samples = []
    for s in radii:
        count = 0
        while count < n_samples // len(radii) + 1:
            w = s * np.exp(2j * np.pi * rng.random())
            tau = -np.log(w)
            th = theta1(0.5j * tau, config.r)
            if abs(th) > 1e-8:
                samples.append(complex(prime_P(w, config)) * np.exp(tau / 2) / th)
                count += 1
    rho = np.asarray(samples)
    return float(np.max(np.abs(rho / rho[0] - 1)))


def _phi_prime_product(w, config: AnnulusConfig):
    x = config.require_x()
    rot = np.exp(1j * np.pi / 3)
    return (1 / w) * prime_P(-x * w / rot, config) ** 2 \
        * prime_P(-x * w * rot, config) ** 2 / prime_P(-x * w, config) ** 4


def _phi_prime_theta(w, config: AnnulusConfig):
    x = config.require_x()
    rot = np.exp(1j * np.pi / 3)
    return (1 / w) * prime_P_theta(-x * w / rot, config) ** 2 \
        * prime_P_theta(-x * w * rot, config) ** 2 / prime_P_theta(-x * w, config) ** 4


def annulus_phi_prime(w, config: AnnulusConfig):
    """Candidate phi'(w): (product-form value, theta-form value).

    The two forms must agree up to a w-independent constant; with the per-
    factor theta rewrite used here the constant is exactly 1.
    """
    w = np.asarray(w, dtype=complex)
    return _phi_prime_product(w, config), _phi_prime_theta(w, config)


def annulus_singularities(config: AnnulusConfig) -> dict:
    """Zero locations of the P factors of the candidate derivative.

    The denominator factor P(-x w) vanishes at w = -r^{2k}/x, none of which
    lie inside the annulus, so the candidate derivative is analytic there
    despite the normalization wanting a pole at -x; both facts are reported
    rather than reconciled.
    """
    x = config.require_x()
    r = config.r
    rot = np.exp(1j * np.pi / 3)
    inside = lambda z: r < abs(z) < 1
    ks = range(-2, 3)
    den = [-(r ** (2 * k)) / x for k in ks]
    num = [-(r ** (2 * k)) / (x * rot) for k in ks] + \
          [-(r ** (2 * k)) * rot / x for k in ks]
    return {
        "denominator_zeros": [z for z in den],
        "numerator_zeros": [z for z in num],
        "denominator_zeros_in_annulus": [z for z in den if inside(z)],
        "numerator_zeros_in_annulus": [z for z in num if inside(z)],
        "normalization_pole": -x,
        "normalization_pole_is_denominator_zero": any(
            abs(z + x) < 1e-12 for z in den
        ),
    }


def annulus_periods(config: AnnulusConfig, radii) -> list:
    """Loop integrals of the product-form phi' over |w| = s for each radius.

    Returns dicts with the period and the log coefficient period/(2 pi i);
    a single-valued candidate map requires the common period to vanish.
    """
    out = []
    for s in radii:
        if not config.r < s < 1:
            raise ValueError(f"radius {s} outside the open annulus")
        loop = CircleLoop(radius=float(s), samples=256)
        period = integrate_loop(lambda z: _phi_prime_product(z, config), loop)
        out.append({
            "radius": float(s),
            "period": period,
            "log_coefficient": period / (2j * np.pi),
        })
    return out


@dataclass(frozen=True)
class AnnulusTraces:
    outer: Polyline
    inner: Polyline
    outer_closure_defect: float
    inner_closure_defect: float
    period: complex
    open_curve: bool


def annulus_boundary_trace(config: AnnulusConfig, n: int = 2048,
                           closure_tol: float = 1e-8) -> AnnulusTraces:
    """Cumulative integrals of phi' along both boundary circles.

    Candidate two-component boundary curves; when the period at the traced
    radius exceeds closure_tol the polylines carry the open-curve flag.
    """
    period = annulus_periods(config, [math.sqrt(config.r)])[0]["period"]
    open_curve = abs(period) > closure_tol

    def trace(radius: float) -> tuple:
        theta = np.linspace(0, 2 * np.pi, n + 1)
        w = radius * np.exp(1j * theta)
        vals = _phi_prime_product(w, config) * 1j * w
        increments = 0.5 * (vals[1:] + vals[:-1]) * (theta[1] - theta[0])
        pts = np.concatenate([[0.0], np.cumsum(increments)])
        defect = abs(pts[-1] - pts[0])
        # endpoints duplicate when the curve closes, so keep the polyline open
        return Polyline(pts, closed=False), defect

    # the product form is analytic on the closed annulus boundary circles
    outer, d_out = trace(1.0)
    inner, d_in = trace(config.r)
    return AnnulusTraces(
        outer=outer,
        inner=inner,
        outer_closure_defect=d_out,
        inner_closure_defect=d_in,
        period=period,
        open_curve=open_curve,
    )
