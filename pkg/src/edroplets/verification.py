"""Numerical verification of the defining identities of each solution family.

Four independent probes:

  * boundary_residual  -- the droplet equation G = p conj(z) + i tau (arc-length
    derivative of conj(z)) evaluated on the traced boundary;
  * residue_cancellation -- loop integrals of G phi' around the interior poles
    shared by the Schwarz and field functions, which must vanish for the
    family's (p, tau);
  * physicality -- a monodromy test on h = G'/phi' deciding whether sqrt(G')
    is single-valued in the punctured disc;
  * closed_form_crosscheck / qd_match -- the classical printed formulas for
    G, G' and the factored quadratic differential, re-derived numerically.

The numerical-differentiation oracle used throughout is the Cauchy integral
for the first derivative, which is spectrally accurate and independent of the
exact rational derivatives carried by the family evaluators.
"""

from __future__ import annotations

import json
import warnings
from dataclasses import dataclass, replace

import numpy as np

from . import qdiff
from .families import (
    DropletFamily,
    DropletModel,
    ParameterRangeWarning,
    _build,
    _family_of,
    constants,
    interior_poles,
    make_model,
    mpole_constant,
    singularities,
)
from .numerics import (
    CircleLoop,
    ZeroOnContourError,
    integrate_loop,
    winding_along,
    winding_count,
)

__all__ = [
    "VerificationReport",
    "PhysicalityResult",
    "DegenerateBoundaryError",
    "LoopPlacementError",
    "DEFAULT_TOLERANCES",
    "boundary_residual",
    "orientation_sign",
    "residue_cancellation",
    "physicality",
    "locate_odd_zero_candidates",
    "closed_form_crosscheck",
    "qd_match",
    "cauchy_derivative",
    "run_verification",
]

DEFAULT_TOLERANCES = {
    "boundary_residual": 1e-10,
    "residue": 1e-12,
    "closed_form": 1e-11,
    "qd_match": 1e-11,
}


class DegenerateBoundaryError(Exception):
    def __init__(self, nodes):
        self.nodes = tuple(nodes)
        super().__init__(f"phi' vanishes at grid nodes {self.nodes}")


class LoopPlacementError(Exception):
    pass


def _model_of(obj) -> DropletModel:
    if isinstance(obj, DropletModel):
        return obj
    return make_model(_family_of(obj))


def _boundary_data(model: DropletModel, n: int):
    fam = model.family
    ev = _build(fam)
    theta = np.linspace(-np.pi, np.pi, n, endpoint=False)
    w = np.exp(1j * theta)
    dph = ev.dphi(w)
    speed = np.abs(dph)
    degenerate = np.nonzero(speed < 1e-12 * max(1.0, speed.max()))[0]
    if len(degenerate):
        raise DegenerateBoundaryError(degenerate)
    target_p = model.p * np.conj(ev.phi(w))
    tangent_conj = np.conj(1j * w * dph / speed)
    g_vals = model.g_hat(w)
    return theta, g_vals, target_p, tangent_conj


def orientation_sign(model_or_family, n: int = 64) -> int:
    """Arc-length orientation sign of the tau term, fixed at theta = pi/2.

    The boundary equation is stated up to the traversal direction of the
    boundary; the sign making the residual vanish at theta = pi/2 is recorded
    and reused.
    """
    model = _model_of(model_or_family)
    _, g_vals, target_p, tangent_conj = _boundary_data(model, n)
    k = n // 4 * 3  # theta grid starts at -pi, so index 3n/4 is theta = pi/2
    res_plus = abs(g_vals[k] - target_p[k] - 1j * model.tau * tangent_conj[k])
    res_minus = abs(g_vals[k] - target_p[k] + 1j * model.tau * tangent_conj[k])
    return 1 if res_plus <= res_minus else -1


def boundary_residual(model_or_family, n: int = 4096) -> float:
    """Max over the theta grid of the droplet-equation residual."""
    if n < 256:
        raise ValueError("boundary_residual requires n >= 256")
    model = _model_of(model_or_family)
    sigma = orientation_sign(model)
    _, g_vals, target_p, tangent_conj = _boundary_data(model, n)
    res = g_vals - target_p - 1j * model.tau * sigma * tangent_conj
    return float(np.max(np.abs(res)))


def _loop_radius(pole: complex, others, requested: float) -> float:
    # entries within 1e-6 of the pole are numerical images of the pole itself
    clearance = min(
        [abs(pole - o) for o in others if abs(pole - o) > 1e-6]
        + [abs(1.0 - abs(pole))],
    )
    radius = min(requested, 0.45 * clearance)
    if radius < 1e-6:
        raise LoopPlacementError(
            f"no room for a loop around {pole}: clearance {clearance:.3e}"
        )
    return radius


def residue_cancellation(model_or_family, radius: float = 0.05):
    """|loop integral of G phi'| around each interior pole of S and F."""
    model = _model_of(model_or_family)
    fam = model.family
    ev = _build(fam)
    poles = interior_poles(fam)
    others = [s for s in singularities(fam)] + [0.0]
    out = []
    for pole in poles:
        r = _loop_radius(pole, others, radius)
        loop = CircleLoop(center=pole, radius=r, samples=64)
        val = integrate_loop(lambda z: model.g_hat(z) * ev.dphi(z), loop)
        out.append((pole, abs(val)))
    return out


# --------------------------------------------------------------------------
# physicality: monodromy of sqrt(G'/phi')


@dataclass(frozen=True)
class PhysicalityResult:
    verdict: str | None
    zeros: tuple  # ((location, multiplicity), ...)
    outer_winding: int
    converged: bool

    def __str__(self):
        return self.verdict or "unresolved"


def _h_callable(fam: DropletFamily):
    ev = _build(fam)
    num = ev.dg.num * ev.dphi.den
    den = ev.dg.den * ev.dphi.num

    def h(w):
        return num(np.asarray(w, dtype=complex)) / den(np.asarray(w, dtype=complex))

    return h


def _rounded_box_path(x0, x1, y0, y1, corner: float):
    """Closed path tracing the box boundary with quarter-circle corners."""
    r = min(corner, 0.25 * min(x1 - x0, y1 - y0))
    straights = [
        (complex(x0 + r, y0), complex(x1 - r, y0)),
        (complex(x1, y0 + r), complex(x1, y1 - r)),
        (complex(x1 - r, y1), complex(x0 + r, y1)),
        (complex(x0, y1 - r), complex(x0, y0 + r)),
    ]
    corners = [
        (complex(x1 - r, y0 + r), -np.pi / 2),
        (complex(x1 - r, y1 - r), 0.0),
        (complex(x0 + r, y1 - r), np.pi / 2),
        (complex(x0 + r, y0 + r), np.pi),
    ]

    def path(t):
        # eight legs of equal parameter length
        leg = int(t * 8) % 8
        s = t * 8 - int(t * 8)
        if leg % 2 == 0:
            a, b = straights[leg // 2]
            return a + s * (b - a)
        center, phase0 = corners[leg // 2]
        return center + r * np.exp(1j * (phase0 + s * np.pi / 2))

    return path


def _box_winding(h, x0, x1, y0, y1) -> int:
    return winding_along(h, _rounded_box_path(x0, x1, y0, y1, corner=1e-3), n0=64)


def locate_odd_zero_candidates(fam: DropletFamily, tol_loc: float = 1e-3,
                               max_depth: int = 12, max_retries: int = 5,
                               search_radius: float = 1.0):
    """Zeros of G'/phi' inside the disc, located by quad-tree winding subdivision.

    Returns ((location, multiplicity), ...) with locations sharpened by the
    argument-principle first moment around each cluster.
    """
    h = _h_callable(fam)
    rng = np.random.default_rng(20)
    for attempt in range(max_retries + 1):
        # asymmetric margins keep subdivision lines off the coordinate axes,
        # where families with real parameters place their symmetric zeros
        dx, dy = 0.0043, 0.0067
        if attempt:
            dx += (rng.random() * 2 - 1) * 2e-3
            dy += (rng.random() * 2 - 1) * 2e-3
        try:
            boxes = [(-1.02 + dx, 1.02 + dx, -1.02 + dy, 1.02 + dy)]
            found = []
            depth = 0
            while boxes and depth <= max_depth:
                next_boxes = []
                for (x0, x1, y0, y1) in boxes:
                    # skip boxes fully outside the search disc
                    cx = min(max(0.0, x0), x1)
                    cy = min(max(0.0, y0), y1)
                    if abs(complex(cx, cy)) > search_radius:
                        continue
                    wind = _box_winding(h, x0, x1, y0, y1)
                    if wind == 0:
                        continue
                    if (x1 - x0) <= tol_loc:
                        found.append((x0, x1, y0, y1, wind))
                        continue
                    xm, ym = 0.5 * (x0 + x1), 0.5 * (y0 + y1)
                    next_boxes += [
                        (x0, xm, y0, ym), (xm, x1, y0, ym),
                        (x0, xm, ym, y1), (xm, x1, ym, y1),
                    ]
                boxes = next_boxes
                depth += 1
            if boxes:
                raise RuntimeError("quad-tree depth cap reached with live boxes")
            return tuple(_sharpen_clusters(fam, h, found, tol_loc))
        except ZeroOnContourError:
            continue
    raise RuntimeError("zero location failed after jitter retries")


def _sharpen_clusters(fam, h, found, tol_loc):
    ev = _build(fam)
    dnum = (ev.dg.num * ev.dphi.den).deriv()
    num = ev.dg.num * ev.dphi.den
    clusters = []
    for (x0, x1, y0, y1, wind) in found:
        center = complex(0.5 * (x0 + x1), 0.5 * (y0 + y1))
        for cl in clusters:
            if abs(cl["center"] - center) < 3 * tol_loc:
                cl["wind"] += wind
                cl["members"].append(center)
                break
        else:
            clusters.append({"center": center, "wind": wind, "members": [center]})
    out = []
    for cl in clusters:
        center = np.mean(cl["members"])
        radius = 2.5 * tol_loc
        loop = CircleLoop(center=center, radius=radius, samples=64)
        # den factors of h have no zeros this deep inside the disc, so the
        # numerator winding is the cluster multiplicity
        total = winding_count(num, loop)
        # first moment of the zero distribution: exact location for a cluster
        moment = integrate_loop(
            lambda w: w * dnum(w) / num(w), loop, tol=1e-12
        ) / (2j * np.pi)
        location = complex(moment / total) if total else complex(center)
        out.append((location, int(cl["wind"])))
    return out


def physicality(model_or_family, outer_radius: float = 0.999,
                tol_loc: float = 1e-3) -> PhysicalityResult:
    """Monodromy verdict: Physical iff sqrt(G'/phi') is single-valued.

    Every located interior zero of h = G'/phi' must carry even multiplicity
    and the winding of h around |w| = outer_radius must be even (the latter
    covers the branch behaviour at the puncture).
    """
    model = _model_of(model_or_family)
    fam = model.family
    h = _h_callable(fam)
    outer = winding_count(h, CircleLoop(radius=outer_radius, samples=512))
    try:
        zeros = locate_odd_zero_candidates(fam, tol_loc=tol_loc)
        converged = True
    except RuntimeError:
        return PhysicalityResult(None, (), outer, False)
    interior = tuple((z, m) for z, m in zeros if abs(z) < 1.0)
    all_even = all(m % 2 == 0 for _, m in interior) and outer % 2 == 0
    verdict = "Physical" if all_even else "Mathematical"
    return PhysicalityResult(verdict, interior, outer, converged)


# --------------------------------------------------------------------------
# closed-form crosschecks


def cauchy_derivative(f, w0: complex, radius: float, samples: int = 64) -> complex:
    """f'(w0) via the Cauchy integral on a circle of the given radius."""
    loop = CircleLoop(center=w0, radius=radius, samples=samples)
    val = integrate_loop(lambda z: f(z) / (z - w0) ** 2, loop)
    return val / (2j * np.pi)


def _sample_points(fam: DropletFamily, n_samples: int, seed: int = 11):
    """Disc points keeping clear of all evaluator singularities."""
    rng = np.random.default_rng(seed)
    sing = list(singularities(fam)) + [0.0]
    pts = []
    while len(pts) < n_samples:
        w = (0.15 + 0.78 * rng.random()) * np.exp(2j * np.pi * rng.random())
        clearance = min(abs(w - s) for s in sing)
        if clearance > 0.08 and abs(w) < 0.93:
            pts.append(w)
    return np.asarray(pts)


def _deriv_radius(fam, w0: float) -> float:
    sing = list(singularities(fam)) + [0.0]
    return min(0.06, 0.45 * min(abs(w0 - s) for s in sing))


def closed_form_crosscheck(model_or_family, n_samples: int = 256) -> dict:
    """Max deviation of numerically differentiated G from each printed closed form.

    Checks per family (w-coordinate throughout):
      circle   g_prime_constant  G' == 2
      mcleod   g_hat_closed_form G == (3w^2-1)/(w(1-w^2/3))
      ksv      g_prime_remark    -G' == 2(c^2-1)(1-cw)^2(c^2/2 w^4+(c^4+1)w^2+c^2/2)
                                        / ((c^2w^2-cw+1)^2 w^2)
      twopole  g_hat_closed_form G == (9c^4-1) w (3+c^2w^2)/(1+3c^2w^2)
               sqrt_g_prime_square  G' == (27c^4-3)(1-c^2w^2)^2/(3c^2w^2+1)^2
      mpole    g_prime_square    G'/(A_m (m+1)) == [((m-1)u+1)/((m+1)u-1)]^2,
                                 u = (icw)^m
    """
    model = _model_of(model_or_family)
    fam = model.family
    c = fam.c
    pts = _sample_points(fam, n_samples)
    g = model.g_hat
    out: dict = {}

    def max_dev(predicted, actual):
        predicted = np.asarray(predicted)
        actual = np.asarray(actual)
        return float(np.max(np.abs(predicted - actual) /
                            np.maximum(1.0, np.abs(actual))))

    def g_prime_numeric():
        return np.asarray([
            cauchy_derivative(g, w0, _deriv_radius(fam, w0)) for w0 in pts
        ])

    if fam.tag == "circle":
        out["g_prime_constant"] = max_dev(g_prime_numeric(), 2.0 + 0j)
    elif fam.tag == "mcleod":
        closed = (3 * pts**2 - 1) / (pts * (1 - pts**2 / 3))
        out["g_hat_closed_form"] = max_dev(g(pts), closed)
    elif fam.tag == "ksv":
        dg = g_prime_numeric()
        closed = (2 * (c**2 - 1) * (1 - c * pts) ** 2
                  * (c**2 / 2 * pts**4 + (c**4 + 1) * pts**2 + c**2 / 2)
                  / ((c**2 * pts**2 - c * pts + 1) ** 2 * pts**2))
        out["g_prime_remark"] = max_dev(-dg, closed)
    elif fam.tag == "twopole":
        closed_g = (9 * c**4 - 1) * pts * (3 + c**2 * pts**2) / (1 + 3 * c**2 * pts**2)
        out["g_hat_closed_form"] = max_dev(g(pts), closed_g)
        dg = g_prime_numeric()
        closed_dg = (27 * c**4 - 3) * (1 - c**2 * pts**2) ** 2 \
            / (3 * c**2 * pts**2 + 1) ** 2
        out["sqrt_g_prime_square"] = max_dev(dg, closed_dg)
    elif fam.tag == "mpole":
        m = fam.m
        a_m = mpole_constant(m, c)
        dg = g_prime_numeric()
        u = (1j * c * pts) ** m
        square = (((m - 1) * u + 1) / ((m + 1) * u - 1)) ** 2
        out["g_prime_square"] = max_dev(dg / (a_m * (m + 1)), square)
    else:
        raise ValueError(f"no closed-form crosschecks for family {fam.tag!r}")
    return out


def qd_match(model_or_family, n_samples: int = 128) -> float:
    """Relative deviation of F^2 phi'^2 from the canonical factored differential."""
    model = _model_of(model_or_family)
    fam = model.family
    ev = _build(fam)
    if fam.tag == "ksv":
        qd = qdiff.ksv_qd(fam.c)
    elif fam.tag == "twopole":
        qd = qdiff.twopole_qd(fam.c)
    else:
        raise ValueError("qd_match applies to the ksv and twopole families")
    pts = _sample_points(fam, n_samples, seed=13)
    lhs = (ev.field(pts) * ev.dphi(pts)) ** 2
    rhs = qdiff.eval_qd(qd, pts)
    return float(np.max(np.abs(lhs - rhs) / np.maximum(1.0, np.abs(rhs))))


# --------------------------------------------------------------------------
# reports


@dataclass(frozen=True)
class VerificationReport:
    family: dict
    p: float
    tau: float
    orientation: int
    max_boundary_residual: float
    residues: tuple  # ((pole re, pole im, magnitude), ...)
    physicality: str | None
    physicality_zeros: tuple
    outer_winding: int
    closed_form_deviations: dict
    qd_deviation: float | None
    checks: dict  # name -> {"value", "tolerance", "passed"}

    @property
    def passed(self) -> bool:
        return all(entry["passed"] for entry in self.checks.values())

    def to_dict(self) -> dict:
        return {
            "family": self.family,
            "p": self.p,
            "tau": self.tau,
            "orientation": self.orientation,
            "max_boundary_residual": self.max_boundary_residual,
            "residues": [
                {"pole": [re, im], "magnitude": mag} for re, im, mag in self.residues
            ],
            "physicality": self.physicality,
            "physicality_zeros": [
                {"location": [z.real, z.imag], "multiplicity": m}
                for z, m in self.physicality_zeros
            ],
            "outer_winding": self.outer_winding,
            "closed_form_deviations": dict(self.closed_form_deviations),
            "qd_deviation": self.qd_deviation,
            "checks": self.checks,
        }

    def to_json(self, indent: int = 2) -> str:
        return json.dumps(self.to_dict(), indent=indent, sort_keys=True)


def run_verification(model_or_family, n: int = 4096, tolerances: dict | None = None,
                     perturb_tau: float = 0.0) -> VerificationReport:
    """Run every verification probe for one model and assemble the report."""
    tol = dict(DEFAULT_TOLERANCES)
    if tolerances:
        tol.update(tolerances)
    model = _model_of(model_or_family)
    if perturb_tau:
        model = replace(model, tau=model.tau + perturb_tau)
    fam = model.family

    with warnings.catch_warnings():
        warnings.simplefilter("ignore", ParameterRangeWarning)
        sigma = orientation_sign(model)
        residual = boundary_residual(model, n=n)
        residues = residue_cancellation(model)
        phys = physicality(model)
        canonical = make_model(fam)
        deviations = closed_form_crosscheck(canonical, n_samples=min(n, 256))
        qd_dev = qd_match(canonical) if fam.tag in ("ksv", "twopole") else None

    checks = {
        "boundary_residual": {
            "value": residual,
            "tolerance": tol["boundary_residual"],
            "passed": residual < tol["boundary_residual"],
        },
        "residue_cancellation": {
            "value": max((mag for _, mag in residues), default=0.0),
            "tolerance": tol["residue"],
            "passed": all(mag < tol["residue"] for _, mag in residues),
        },
        "closed_form": {
            "value": max(deviations.values(), default=0.0),
            "tolerance": tol["closed_form"],
            "passed": all(v < tol["closed_form"] for v in deviations.values()),
        },
    }
    if qd_dev is not None:
        checks["qd_match"] = {
            "value": qd_dev,
            "tolerance": tol["qd_match"],
            "passed": qd_dev < tol["qd_match"],
        }

    return VerificationReport(
        family=fam.describe(),
        p=model.p,
        tau=model.tau,
        orientation=sigma,
        max_boundary_residual=residual,
        residues=tuple((p.real, p.imag, mag) for p, mag in residues),
        physicality=phys.verdict,
        physicality_zeros=phys.zeros,
        outer_winding=phys.outer_winding,
        closed_form_deviations=deviations,
        qd_deviation=qd_dev,
        checks=checks,
    )
