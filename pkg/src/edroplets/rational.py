"""Rational functions as pairs of numpy polynomials.

All closed-form objects of the solution families (maps, Schwarz functions,
field functions and their combinations) are rational in the disc coordinate,
so a ratio of two `numpy.polynomial.Polynomial` objects with exact quotient-rule
derivatives covers every evaluator the package needs.  No gcd simplification is
performed; degrees stay small enough that cancellation noise is irrelevant on
the closed unit disc.
"""

from __future__ import annotations

import numpy as np
from numpy.polynomial import Polynomial


def _as_poly(obj) -> Polynomial:
    if isinstance(obj, Polynomial):
        return obj
    if np.isscalar(obj):
        return Polynomial([obj])
    return Polynomial(np.asarray(obj, dtype=complex))


class Rational:
    """Quotient num/den of two polynomials in one complex variable."""

    __slots__ = ("num", "den")

    def __init__(self, num, den=1):
        self.num = _as_poly(num)
        self.den = _as_poly(den)

    def __call__(self, w):
        return self.num(w) / self.den(w)

    def deriv(self) -> "Rational":
        return Rational(
            self.num.deriv() * self.den - self.num * self.den.deriv(),
            self.den**2,
        )

    def poles(self) -> np.ndarray:
        """Roots of the denominator (with multiplicity, unsorted)."""
        return self.den.roots()

    def __neg__(self) -> "Rational":
        return Rational(-self.num, self.den)

    def __add__(self, other) -> "Rational":
        other = as_rational(other)
        return Rational(
            self.num * other.den + other.num * self.den, self.den * other.den
        )

    def __radd__(self, other) -> "Rational":
        return self.__add__(other)

    def __sub__(self, other) -> "Rational":
        return self.__add__(-as_rational(other))

    def __rsub__(self, other) -> "Rational":
        return (-self).__add__(other)

    def __mul__(self, other) -> "Rational":
        other = as_rational(other)
        return Rational(self.num * other.num, self.den * other.den)

    def __rmul__(self, other) -> "Rational":
        return self.__mul__(other)

    def __truediv__(self, other) -> "Rational":
        other = as_rational(other)
        return Rational(self.num * other.den, self.den * other.num)

    def __repr__(self) -> str:
        return f"Rational({self.num.coef!r}, {self.den.coef!r})"


def as_rational(obj) -> Rational:
    if isinstance(obj, Rational):
        return obj
    return Rational(obj)


def reflected(f: Rational) -> Rational:
    """Return f*(1/w), the coefficient-conjugated reflection of f.

    For a map with f = conj(g) on the unit circle, this is the analytic
    continuation of conj(f(w)) off |w| = 1; it is how every family's Schwarz
    function is produced from its conformal map.
    """
    pc = np.conj(f.num.coef)
    qc = np.conj(f.den.coef)
    dp, dq = len(pc) - 1, len(qc) - 1
    d = max(dp, dq)
    num = Polynomial(pc[::-1]) * Polynomial.basis(d - dp) if d > dp else Polynomial(pc[::-1])
    den = Polynomial(qc[::-1]) * Polynomial.basis(d - dq) if d > dq else Polynomial(qc[::-1])
    return Rational(num, den)
