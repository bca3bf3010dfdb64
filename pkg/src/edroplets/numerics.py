"""Shared numerical substrate.

Loop integrals by the trapezoid rule with Richardson-style doubling,
argument-principle winding counts with adaptive phase unwrapping, threshold
bisection on real parameters, and self-intersection detection for closed
polylines.  Everything here is a pure function of its inputs.
"""

from __future__ import annotations

from dataclasses import dataclass, field

import numpy as np

TWO_PI = 2.0 * np.pi

# Relative floor below which |f| on a contour counts as a zero on the contour.
ZERO_FLOOR_REL = 1e-13


class NumericsError(Exception):
    pass


class NonFiniteSampleError(NumericsError):
    """An integrand returned inf/nan at a quadrature node."""

    def __init__(self, node: complex, message: str = ""):
        self.node = node
        super().__init__(message or f"non-finite integrand value at node {node}")


class LoopConvergenceError(NumericsError):
    def __init__(self, last: complex, prev: complex):
        self.last, self.prev = last, prev
        super().__init__(
            f"loop integral did not converge: last two estimates {prev} and {last}"
        )


class ZeroOnContourError(NumericsError):
    def __init__(self, node: complex):
        self.node = node
        super().__init__(f"|f| below zero floor on contour near {node}")


class BracketError(NumericsError):
    pass


class DegenerateSegmentError(NumericsError):
    pass


def _is_power_of_two(n: int) -> bool:
    return n >= 1 and (n & (n - 1)) == 0


@dataclass(frozen=True)
class CircleLoop:
    """Circular integration contour.

    `samples` is the initial node count; it must be a power of two so the
    doubling stop rule can reuse previous nodes.
    """

    center: complex = 0.0
    radius: float = 1.0
    orientation: str = "ccw"
    samples: int = 256

    def __post_init__(self):
        if not self.radius > 0:
            raise ValueError("radius must be positive")
        if self.orientation not in ("ccw", "cw"):
            raise ValueError("orientation must be 'ccw' or 'cw'")
        if self.samples < 16 or not _is_power_of_two(self.samples):
            raise ValueError("samples must be a power of two >= 16")

    @property
    def sign(self) -> int:
        return 1 if self.orientation == "ccw" else -1

    def nodes(self, n: int, offset: float = 0.0) -> np.ndarray:
        theta = offset + TWO_PI * np.arange(n) / n
        return self.center + self.radius * np.exp(1j * theta)


def integrate_loop(f, loop: CircleLoop, tol: float = 1e-12, max_doublings: int = 12) -> complex:
    """Contour integral of f over the loop.

    Trapezoid rule on the circle, spectrally accurate for integrands analytic
    in a neighbourhood of the contour; the node count doubles until two
    successive estimates agree within `tol` (relative to the magnitude of the
    estimate, floored at 1).
    """

    def weighted_sum(z):
        vals = f(z)
        vals = np.asarray(vals, dtype=complex)
        bad = ~np.isfinite(vals)
        if np.any(bad):
            raise NonFiniteSampleError(complex(z[np.argmax(bad)]))
        return np.sum(vals * (z - loop.center))

    n = loop.samples
    total = weighted_sum(loop.nodes(n))
    estimate = 1j * TWO_PI / n * total * loop.sign
    for _ in range(max_doublings):
        total += weighted_sum(loop.nodes(n, offset=np.pi / n))
        n *= 2
        new = 1j * TWO_PI / n * total * loop.sign
        if abs(new - estimate) <= tol * max(1.0, abs(new)):
            return complex(new)
        prev, estimate = estimate, new
    raise LoopConvergenceError(estimate, prev)


def _unwrap_increments(f, path, t0: float, t1: float, f0: complex, f1: complex,
                       floor: float, depth: int = 0, max_depth: int = 20) -> float:
    """Total continuous change of arg f along path(t), t in [t0, t1]."""
    delta = np.angle(f1 / f0)
    if abs(delta) <= np.pi / 2:
        return delta
    if depth >= max_depth:
        raise NumericsError(
            f"phase unwrapping exceeded depth {max_depth} near t={0.5*(t0+t1):.6g}"
        )
    tm = 0.5 * (t0 + t1)
    zm = path(tm)
    fm = complex(np.asarray(f(np.array([zm])), dtype=complex).ravel()[0])
    if not np.isfinite(fm) or abs(fm) < floor:
        raise ZeroOnContourError(zm)
    return _unwrap_increments(f, path, t0, tm, f0, fm, floor, depth + 1, max_depth) + \
        _unwrap_increments(f, path, tm, t1, fm, f1, floor, depth + 1, max_depth)


def winding_along(f, path, n0: int = 256) -> int:
    """Winding number of f along the closed parametric path(t), t in [0, 1)."""
    t = np.arange(n0) / n0
    z = np.asarray([path(ti) for ti in t])
    vals = np.asarray(f(z), dtype=complex)
    if np.any(~np.isfinite(vals)):
        raise NonFiniteSampleError(complex(z[np.argmax(~np.isfinite(vals))]))
    fmax = np.max(np.abs(vals))
    floor = ZERO_FLOOR_REL * fmax
    if np.min(np.abs(vals)) < floor:
        raise ZeroOnContourError(complex(z[np.argmin(np.abs(vals))]))
    total = 0.0
    for k in range(n0):
        k2 = (k + 1) % n0
        t1 = t[k2] if k2 != 0 else 1.0
        total += _unwrap_increments(f, path, t[k], t1, vals[k], vals[k2], floor)
    winding = total / TWO_PI
    rounded = int(np.rint(winding))
    if abs(winding - rounded) > 0.25:
        raise NumericsError(f"winding did not settle on an integer: {winding}")
    return rounded


def winding_count(f, loop: CircleLoop) -> int:
    """(1/2pi) * total change of arg f around the loop, by phase unwrapping."""

    def path(t):
        return loop.center + loop.radius * np.exp(1j * TWO_PI * t * loop.sign)

    return winding_along(f, path)


def bisect_threshold(predicate, lo: float, hi: float, tol: float = 1e-10,
                     max_iter: int = 200) -> float:
    """Locate the parameter where predicate flips from True (at lo) to False (at hi)."""
    plo, phi_ = predicate(lo), predicate(hi)
    if not plo or phi_:
        raise BracketError(
            f"invalid bracket: predicate({lo}) = {plo}, predicate({hi}) = {phi_}"
        )
    for _ in range(max_iter):
        if hi - lo <= tol:
            break
        mid = 0.5 * (lo + hi)
        if predicate(mid):
            lo = mid
        else:
            hi = mid
    return 0.5 * (lo + hi)


@dataclass(frozen=True)
class Polyline:
    points: np.ndarray
    closed: bool = True

    def __post_init__(self):
        pts = np.asarray(self.points, dtype=complex)
        object.__setattr__(self, "points", pts)
        if self.closed and len(pts) < 3:
            raise ValueError("a closed polyline needs at least 3 points")

    def segments(self):
        """(start, end) arrays for each segment, including the closing one."""
        p = self.points
        if self.closed:
            return p, np.roll(p, -1)
        return p[:-1], p[1:]


@dataclass(frozen=True)
class SimplicityResult:
    simple: bool
    intersections: tuple
    inconclusive: tuple = field(default=())

    @property
    def conclusive(self) -> bool:
        return not self.inconclusive

    def __bool__(self) -> bool:
        # Strict verdict: thresholds are approached from the simple side,
        # so "inconclusive" counts as not simple.
        return self.simple and self.conclusive


def _candidate_pairs(a: np.ndarray, b: np.ndarray, n: int, closed: bool):
    """Index pairs of segments whose bounding boxes share a grid cell."""
    lengths = np.abs(b - a)
    if np.min(lengths) == 0.0:
        raise DegenerateSegmentError(
            f"zero-length segment at index {int(np.argmin(lengths))}"
        )
    h = max(np.max(lengths), 1e-300)
    xlo = np.minimum(a.real, b.real)
    xhi = np.maximum(a.real, b.real)
    ylo = np.minimum(a.imag, b.imag)
    yhi = np.maximum(a.imag, b.imag)
    cells: dict = {}
    ix0 = np.floor(xlo / h).astype(np.int64)
    ix1 = np.floor(xhi / h).astype(np.int64)
    iy0 = np.floor(ylo / h).astype(np.int64)
    iy1 = np.floor(yhi / h).astype(np.int64)
    for i in range(n):
        for cx in range(ix0[i], ix1[i] + 1):
            for cy in range(iy0[i], iy1[i] + 1):
                cells.setdefault((cx, cy), []).append(i)
    pairs = set()
    for members in cells.values():
        m = len(members)
        if m < 2:
            continue
        for u in range(m):
            for v in range(u + 1, m):
                i, j = members[u], members[v]
                if i > j:
                    i, j = j, i
                if j - i == 1:
                    continue
                if closed and i == 0 and j == n - 1:
                    continue
                pairs.add((i, j))
    if not pairs:
        return np.empty(0, dtype=np.int64), np.empty(0, dtype=np.int64)
    arr = np.asarray(sorted(pairs), dtype=np.int64)
    return arr[:, 0], arr[:, 1]


def polyline_is_simple(curve: Polyline, tol: float = 1e-12) -> SimplicityResult:
    """Detect self-intersections of a closed polyline.

    Segment pairs sharing a spatial-hash cell are tested with orientation
    predicates; configurations within a tol-band of touching are reported as
    inconclusive rather than decided.
    """
    if not curve.closed:
        raise ValueError("simplicity test is defined for closed polylines")
    a, b = curve.segments()
    n = len(a)
    ii, jj = _candidate_pairs(a, b, n, curve.closed)
    if len(ii) == 0:
        return SimplicityResult(True, ())

    A, B = a[ii], b[ii]
    C, D = a[jj], b[jj]
    r = B - A
    s = D - C

    def cross(u, v):
        return u.real * v.imag - u.imag * v.real

    d1 = cross(r, C - A)
    d2 = cross(r, D - A)
    d3 = cross(s, A - C)
    d4 = cross(s, B - C)
    band = tol * np.abs(r) * np.abs(s)

    proper = (d1 * d2 < 0) & (d3 * d4 < 0) & \
        (np.abs(d1) > band) & (np.abs(d2) > band) & \
        (np.abs(d3) > band) & (np.abs(d4) > band)
    touching = (
        (np.minimum(np.abs(d1), np.abs(d2)) <= band)
        | (np.minimum(np.abs(d3), np.abs(d4)) <= band)
    ) & (d1 * d2 <= band * band) & (d3 * d4 <= band * band)

    loci = []
    if np.any(proper):
        t = d3[proper] / (d3[proper] - d4[proper])
        loci = list(A[proper] + t * r[proper])
    fuzzy = list(0.5 * (C[touching & ~proper] + D[touching & ~proper]))
    return SimplicityResult(len(loci) == 0, tuple(loci), tuple(fuzzy))
