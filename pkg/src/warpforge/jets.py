"""Forward-mode 2-jet arithmetic.

A Jet2 carries a function value together with its first and second radial
derivatives.  All profile evaluation and curvature assembly in this package
runs through Jet2 arithmetic, so derivatives are exact up to floating-point
rounding (no symbolic algebra, no finite differencing on the main path).

Fields may hold scalars or numpy arrays of matching shape; every operation
is a pure function of its inputs and safe for unrestricted parallel use.
"""

from __future__ import annotations

from dataclasses import dataclass
from typing import Union

import numpy as np

Real = Union[float, np.ndarray]


class JetDomainError(ValueError):
    """Raised when a jet operation leaves its domain (divide by zero, ln of
    a nonpositive value, fractional power of a nonpositive base)."""


def _any(mask) -> bool:
    return bool(np.any(mask))


@dataclass(frozen=True)
class Jet2:
    """Value, first derivative and second derivative at a point."""

    v: Real
    d1: Real
    d2: Real

    # -- arithmetic -------------------------------------------------------

    def __add__(self, other):
        o = as_jet(other)
        return Jet2(self.v + o.v, self.d1 + o.d1, self.d2 + o.d2)

    __radd__ = __add__

    def __neg__(self):
        return Jet2(-self.v, -self.d1, -self.d2)

    def __sub__(self, other):
        o = as_jet(other)
        return Jet2(self.v - o.v, self.d1 - o.d1, self.d2 - o.d2)

    def __rsub__(self, other):
        return as_jet(other) - self

    def __mul__(self, other):
        # grouping keeps a*b == b*a bit-for-bit
        o = as_jet(other)
        return Jet2(
            self.v * o.v,
            self.d1 * o.v + self.v * o.d1,
            (self.d2 * o.v + self.v * o.d2) + 2.0 * (self.d1 * o.d1),
        )

    __rmul__ = __mul__

    def __truediv__(self, other):
        o = as_jet(other)
        if _any(o.v == 0.0):
            raise JetDomainError(f"jet division by zero value (divisor v={o.v!r})")
        q = self.v / o.v
        d1 = (self.d1 - q * o.d1) / o.v
        d2 = (self.d2 - 2.0 * d1 * o.d1 - q * o.d2) / o.v
        return Jet2(q, d1, d2)

    def __rtruediv__(self, other):
        return as_jet(other) / self

    def __pow__(self, exponent):
        return jet_pow(self, exponent)


def as_jet(x) -> Jet2:
    """Lift a constant to a jet; pass jets through unchanged."""
    if isinstance(x, Jet2):
        return x
    return Jet2(x, 0.0 * np.asarray(x), 0.0 * np.asarray(x)) if isinstance(
        x, np.ndarray
    ) else Jet2(float(x), 0.0, 0.0)


def jet_var(r: Real) -> Jet2:
    """The identity jet (r, 1, 0): the evaluation point itself."""
    r = np.asarray(r, dtype=float) if isinstance(r, np.ndarray) else float(r)
    one = np.ones_like(r) if isinstance(r, np.ndarray) else 1.0
    zero = np.zeros_like(r) if isinstance(r, np.ndarray) else 0.0
    return Jet2(r, one, zero)


def jet_const(c: Real) -> Jet2:
    return as_jet(c)


# -- named operations (thin wrappers over the operators) -------------------

def jet_add(a: Jet2, b: Jet2) -> Jet2:
    return a + b


def jet_mul(a: Jet2, b: Jet2) -> Jet2:
    return a * b


def jet_div(a: Jet2, b: Jet2) -> Jet2:
    return a / b


def jet_pow(base: Jet2, exponent: float) -> Jet2:
    """base**exponent with exact jet propagation.

    Integer exponents use repeated multiplication, so negative bases are
    fine there; fractional exponents require base.v > 0.
    """
    if float(exponent) == int(exponent):
        return _int_pow(base, int(exponent))
    if _any(base.v <= 0.0):
        raise JetDomainError(
            f"fractional power of nonpositive base (v={base.v!r}, exp={exponent})"
        )
    p = float(exponent)
    w = base.v ** p
    wp = p * base.v ** (p - 1.0)
    wpp = p * (p - 1.0) * base.v ** (p - 2.0)
    return Jet2(w, wp * base.d1, wpp * base.d1 * base.d1 + wp * base.d2)


def _int_pow(base: Jet2, n: int) -> Jet2:
    if n < 0:
        return 1.0 / _int_pow(base, -n)
    result = as_jet(np.ones_like(base.v)) if isinstance(base.v, np.ndarray) else as_jet(1.0)
    acc = base
    while n:
        if n & 1:
            result = result * acc
        acc = acc * acc
        n >>= 1
    return result


def jet_sqrt(x: Jet2) -> Jet2:
    return jet_pow(x, 0.5)


def jet_sin(x: Jet2) -> Jet2:
    s, c = np.sin(x.v), np.cos(x.v)
    return Jet2(s, c * x.d1, -s * x.d1 * x.d1 + c * x.d2)


def jet_cos(x: Jet2) -> Jet2:
    s, c = np.sin(x.v), np.cos(x.v)
    return Jet2(c, -s * x.d1, -c * x.d1 * x.d1 - s * x.d2)


def jet_sinh(x: Jet2) -> Jet2:
    s, c = np.sinh(x.v), np.cosh(x.v)
    return Jet2(s, c * x.d1, s * x.d1 * x.d1 + c * x.d2)


def jet_exp(x: Jet2) -> Jet2:
    e = np.exp(x.v)
    return Jet2(e, e * x.d1, e * (x.d1 * x.d1 + x.d2))


def jet_ln(x: Jet2) -> Jet2:
    if _any(x.v <= 0.0):
        raise JetDomainError(f"ln of nonpositive value (v={x.v!r})")
    q = x.d1 / x.v
    return Jet2(np.log(x.v), q, x.d2 / x.v - q * q)


def jet_poly(coeffs, x: Jet2) -> Jet2:
    """Evaluate a polynomial sum(coeffs[k] * x**k) by Horner's rule."""
    acc = as_jet(0.0 * np.asarray(x.v)) if isinstance(x.v, np.ndarray) else as_jet(0.0)
    for c in reversed(coeffs):
        acc = acc * x + c
    return acc
