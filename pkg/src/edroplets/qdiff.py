"""Quadratic differentials on the sphere, positive on the unit circle.

The canonical class consists of differentials

    Q(w) dw^2 = -const * prod_k (w - A_k)(1 - conj(A_k) w)
                      * prod_j (w - zeta_j)^{-n_j} (1 - conj(zeta_j) w)^{-n_j} dw^2

with all A_k and zeta_j in the open disc and #zeros = (sum n_j) - 2, zeros
counted with multiplicity.  Such a Q is real and positive along |w| = 1 in the
d(theta)^2 sense and extends to the sphere by reflection.
"""

from __future__ import annotations

from dataclasses import dataclass

import numpy as np

__all__ = [
    "SphereQD",
    "QDValidationError",
    "build_qd",
    "eval_qd",
    "positivity_on_circle",
    "reflection_symmetry",
    "ksv_qd",
    "twopole_qd",
]


class QDValidationError(ValueError):
    pass


@dataclass(frozen=True)
class SphereQD:
    """Factored quadratic differential: constant, zeros (with multiplicity), poles."""

    constant: float
    zeros: tuple
    poles: tuple  # ((location, order), ...)

    @classmethod
    def unchecked(cls, constant, zeros, poles) -> "SphereQD":
        """Bypass validation; for building counterexamples in tests."""
        obj = object.__new__(cls)
        object.__setattr__(obj, "constant", float(constant))
        object.__setattr__(obj, "zeros", tuple(complex(z) for z in zeros))
        object.__setattr__(obj, "poles", tuple((complex(z), int(n)) for z, n in poles))
        return obj

    def to_dict(self) -> dict:
        return {
            "constant": self.constant,
            "zeros": [[z.real, z.imag] for z in self.zeros],
            "poles": [
                {"location": [z.real, z.imag], "order": n} for z, n in self.poles
            ],
        }


def build_qd(zeros, poles, constant: float = 1.0) -> SphereQD:
    """Validated construction; zeros are listed with multiplicity."""
    zs = tuple(complex(z) for z in zeros)
    ps = tuple((complex(z), int(n)) for z, n in poles)
    if constant <= 0:
        raise QDValidationError("constant must be positive")
    total = sum(n for _, n in ps)
    if any(n < 1 for _, n in ps):
        raise QDValidationError("pole orders must be >= 1")
    if len(zs) != total - 2:
        raise QDValidationError(
            f"zero count {len(zs)} != (sum of pole orders) - 2 = {total - 2}"
        )
    if any(abs(z) >= 1 for z in zs):
        raise QDValidationError("all zeros must lie in the open unit disc")
    if any(abs(z) >= 1 for z, _ in ps):
        raise QDValidationError("all poles must lie in the open unit disc")
    return SphereQD(float(constant), zs, ps)


def eval_qd(qd: SphereQD, w):
    """Evaluate Q(w).

    Factors are accumulated as complex logarithms and exponentiated once, so
    products of many near-unit factors neither overflow nor lose their phase.
    """
    w = np.asarray(w, dtype=complex)
    scalar = w.ndim == 0
    w = np.atleast_1d(w)
    acc = np.full(w.shape, np.log(qd.constant), dtype=complex)
    exact_zero = np.zeros(w.shape, dtype=bool)
    at_pole = np.zeros(w.shape, dtype=bool)

    def mul_factor(vals, power):
        nonlocal acc, exact_zero, at_pole
        zero = vals == 0
        if power > 0:
            exact_zero |= zero
        else:
            at_pole |= zero
        safe = np.where(zero, 1.0, vals)
        acc = acc + power * np.log(safe)

    for a in qd.zeros:
        mul_factor(w - a, 1)
        mul_factor(1 - np.conj(a) * w, 1)
    for z0, n in qd.poles:
        mul_factor(w - z0, -n)
        mul_factor(1 - np.conj(z0) * w, -n)

    if np.any(at_pole):
        raise ZeroDivisionError(
            f"Q evaluated at a pole: w = {complex(w[np.argmax(at_pole)])}"
        )
    out = -np.exp(acc)
    out[exact_zero] = 0.0
    return complex(out[0]) if scalar else out


def positivity_on_circle(qd: SphereQD, n: int = 1024, tol: float = 1e-10) -> bool:
    """Check -e^{2 i theta} Q(e^{i theta}) is real positive at n circle nodes."""
    if any(abs(abs(z) - 1) < 1e-12 for z, _ in qd.poles):
        raise ZeroDivisionError("pole on the unit circle")
    theta = 2 * np.pi * np.arange(n) / n
    w = np.exp(1j * theta)
    vals = -np.exp(2j * theta) * eval_qd(qd, w)
    scale = np.maximum(1.0, np.abs(vals))
    if np.any(np.abs(vals.imag) > tol * scale):
        return False
    return bool(np.all(vals.real > 0))


def reflection_symmetry(qd: SphereQD, n_samples: int = 64, seed: int = 5) -> float:
    """Max scaled deviation of conj(Q(1/conj(w))) * w^-4 from Q(w).

    This is the dz^2 transformation law under w -> 1/conj(w) composed with
    conjugation; members of the canonical class satisfy it identically.
    """
    rng = np.random.default_rng(seed)
    pts = []
    special = [z for z, _ in qd.poles] + list(qd.zeros)
    while len(pts) < n_samples:
        w = (0.35 + 0.55 * rng.random()) * np.exp(2j * np.pi * rng.random())
        if all(abs(w - s) > 0.05 for s in special) and \
                all(abs(w - 1 / np.conj(s)) > 0.05 for s in special if s != 0):
            pts.append(w)
    w = np.asarray(pts)
    lhs = np.conj(eval_qd(qd, 1 / np.conj(w))) * w**-4
    rhs = eval_qd(qd, w)
    return float(np.max(np.abs(lhs - rhs) / np.maximum(1.0, np.abs(rhs))))


def ksv_qd(c: float) -> SphereQD:
    """Canonical factored differential of the one-pole family (zeros are double)."""
    a = c * np.exp(1j * np.pi / 3)
    b = np.conj(a)
    return build_qd([a, a, b, b], [(0.0, 4), (c, 2)])


def twopole_qd(c: float) -> SphereQD:
    """Canonical factored differential of the two-pole family at q = -c."""
    a = 1j * np.sqrt(3) * c
    return build_qd([a, a, 0.0, 0.0, -a, -a], [(0.0, 4), (c, 2), (-c, 2)])
