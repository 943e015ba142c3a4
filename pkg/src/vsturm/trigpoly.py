"""Exact closed-form algebra for scalar potential entries.

Every entry of the matrix potential is a finite sum of terms

    c * x**m * cos(k*x)   or   c * x**m * sin(k*x)

with integer power m >= 0 and real frequency k >= 0 (k = 0 covers the
plain polynomial part).  This family is closed under addition,
multiplication, differentiation and antidifferentiation, so every
integral needed by the model builders is evaluated in closed form,
exact up to floating-point rounding.
"""

from __future__ import annotations

from dataclasses import dataclass

import numpy as np

_COS = 0
_SIN = 1


def _add_term(acc: dict, m: int, k: float, trig: int, c: float) -> None:
    """Accumulate one normalized term into a {(m, k, trig): coeff} dict."""
    if c == 0.0:
        return
    if k < 0.0:
        # cos is even, sin is odd in the frequency
        k = -k
        if trig == _SIN:
            c = -c
    if k == 0.0:
        k = 0.0  # collapse -0.0
        if trig == _SIN:
            return  # sin(0) == 0 identically
    key = (int(m), float(k), trig)
    acc[key] = acc.get(key, 0.0) + c


def _canon(acc: dict) -> tuple:
    out = []
    for (m, k, trig), c in sorted(acc.items()):
        if c != 0.0:
            out.append((m, k, trig, float(c)))
    return tuple(out)


def _antiderivative_term(acc: dict, m: int, k: float, trig: int, c: float) -> None:
    """Accumulate the antiderivative of c * x^m * trig(k x) into acc.

    Uses the integration-by-parts recurrences
        int x^m cos(kx) =  x^m sin(kx)/k - (m/k) int x^(m-1) sin(kx)
        int x^m sin(kx) = -x^m cos(kx)/k + (m/k) int x^(m-1) cos(kx)
    """
    if k == 0.0:
        _add_term(acc, m + 1, 0.0, _COS, c / (m + 1))
        return
    if trig == _COS:
        _add_term(acc, m, k, _SIN, c / k)
        if m > 0:
            _antiderivative_term(acc, m - 1, k, _SIN, -c * m / k)
    else:
        _add_term(acc, m, k, _COS, -c / k)
        if m > 0:
            _antiderivative_term(acc, m - 1, k, _COS, c * m / k)


@dataclass(frozen=True)
class TrigPoly:
    """Finite sum of c * x^m * {cos, sin}(k x) terms.

    Immutable and hashable; ``terms`` is a canonically sorted tuple of
    (power, frequency, trig, coefficient) with trig 0 = cos, 1 = sin.
    """

    terms: tuple = ()

    # -- constructors -------------------------------------------------

    @staticmethod
    def from_coeffs(poly=(), cos=(), sin=()) -> "TrigPoly":
        """Build from polynomial coefficients (c0, c1, ...) plus lists of
        (frequency, coefficient) pairs for the cosine and sine parts."""
        acc: dict = {}
        for m, c in enumerate(poly):
            _add_term(acc, m, 0.0, _COS, float(c))
        for k, c in cos:
            _add_term(acc, 0, float(k), _COS, float(c))
        for k, c in sin:
            _add_term(acc, 0, float(k), _SIN, float(c))
        return TrigPoly(_canon(acc))

    @staticmethod
    def const(value: float) -> "TrigPoly":
        return TrigPoly.from_coeffs(poly=(float(value),))

    @staticmethod
    def zero() -> "TrigPoly":
        return TrigPoly(())

    # -- predicates ----------------------------------------------------

    def is_zero(self) -> bool:
        return not self.terms

    def is_constant(self) -> bool:
        return all(m == 0 and k == 0.0 for (m, k, _t, _c) in self.terms)

    def constant_value(self) -> float:
        if not self.is_constant():
            raise ValueError("entry is not constant")
        return sum(c for (_m, _k, _t, c) in self.terms)

    # -- algebra -------------------------------------------------------

    def __add__(self, other):
        if isinstance(other, (int, float)):
            other = TrigPoly.const(other)
        acc: dict = {}
        for m, k, t, c in self.terms:
            _add_term(acc, m, k, t, c)
        for m, k, t, c in other.terms:
            _add_term(acc, m, k, t, c)
        return TrigPoly(_canon(acc))

    __radd__ = __add__

    def __neg__(self):
        return TrigPoly(tuple((m, k, t, -c) for (m, k, t, c) in self.terms))

    def __sub__(self, other):
        if isinstance(other, (int, float)):
            other = TrigPoly.const(other)
        return self + (-other)

    def __rsub__(self, other):
        return (-self) + other

    def __mul__(self, other):
        if isinstance(other, (int, float)):
            s = float(other)
            return TrigPoly(tuple((m, k, t, c * s) for (m, k, t, c) in self.terms))
        acc: dict = {}
        for m1, k1, t1, c1 in self.terms:
            for m2, k2, t2, c2 in other.terms:
                m = m1 + m2
                c = 0.5 * c1 * c2
                if t1 == _COS and t2 == _COS:
                    # cos A cos B = (cos(A-B) + cos(A+B)) / 2
                    _add_term(acc, m, k1 - k2, _COS, c)
                    _add_term(acc, m, k1 + k2, _COS, c)
                elif t1 == _SIN and t2 == _SIN:
                    # sin A sin B = (cos(A-B) - cos(A+B)) / 2
                    _add_term(acc, m, k1 - k2, _COS, c)
                    _add_term(acc, m, k1 + k2, _COS, -c)
                else:
                    # sin A cos B = (sin(A+B) + sin(A-B)) / 2
                    if t1 == _SIN:
                        ka, kb = k1, k2
                    else:
                        ka, kb = k2, k1
                    _add_term(acc, m, ka + kb, _SIN, c)
                    _add_term(acc, m, ka - kb, _SIN, c)
        return TrigPoly(_canon(acc))

    __rmul__ = __mul__

    # -- calculus ------------------------------------------------------

    def derivative(self) -> "TrigPoly":
        acc: dict = {}
        for m, k, t, c in self.terms:
            if m > 0:
                _add_term(acc, m - 1, k, t, c * m)
            if k != 0.0:
                if t == _COS:
                    _add_term(acc, m, k, _SIN, -c * k)
                else:
                    _add_term(acc, m, k, _COS, c * k)
        return TrigPoly(_canon(acc))

    def antiderivative(self) -> "TrigPoly":
        """Antiderivative F with F(0) = 0."""
        acc: dict = {}
        for m, k, t, c in self.terms:
            _antiderivative_term(acc, m, k, t, c)
        # subtract the value at 0 (only x^0 cos terms contribute there)
        at_zero = sum(c for (m, _k, t, c) in
                      ((m, k, t, c) for (m, k, t, c) in _canon(acc))
                      if m == 0 and t == _COS)
        _add_term(acc, 0, 0.0, _COS, -at_zero)
        return TrigPoly(_canon(acc))

    def integrate(self, a: float, b: float) -> float:
        f = self.antiderivative()
        return float(f(b) - f(a))

    # -- evaluation ----------------------------------------------------

    def __call__(self, x):
        xs = np.asarray(x, dtype=float)
        out = np.zeros_like(xs, dtype=float)
        for m, k, t, c in self.terms:
            term = c * (xs ** m) if m else np.full_like(xs, c)
            if k != 0.0:
                term = term * (np.cos(k * xs) if t == _COS else np.sin(k * xs))
            out = out + term
        if np.isscalar(x) or np.ndim(x) == 0:
            return float(out)
        return out


def poly(*coeffs) -> TrigPoly:
    """Polynomial helper: poly(c0, c1, ...) = c0 + c1*x + ..."""
    return TrigPoly.from_coeffs(poly=coeffs)


def cosine(k: float, c: float = 1.0) -> TrigPoly:
    return TrigPoly.from_coeffs(cos=((k, c),))


def sine(k: float, c: float = 1.0) -> TrigPoly:
    return TrigPoly.from_coeffs(sin=((k, c),))
