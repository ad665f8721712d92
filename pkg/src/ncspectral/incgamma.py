"""Upper incomplete gamma for complex order and real nonnegative argument.

Continued fraction for large argument, power series for small argument with
positive real order, and recurrence shifts otherwise; target accuracy 1e-14
relative.  Exact nonpositive-integer orders at small argument go through the
exponential-integral ladder, which stays finite where the plain series route
would divide by a gamma pole.
"""

from __future__ import annotations

import cmath
import math

from scipy.special import gamma as _gamma

__all__ = ["upper_gamma"]

_EPS = 1e-16
_MAXIT = 20_000
_EULER = 0.5772156649015328606


def _gcf(a: complex, x: float) -> complex:
    """Lentz continued fraction for Gamma(a, x), reliable for x >= ~0.3."""
    tiny = 1e-300
    b = x + 1.0 - a
    c = 1.0 / tiny
    d = 1.0 / b if b != 0 else 1.0 / tiny
    h = d
    for i in range(1, _MAXIT):
        an = -i * (i - a)
        b += 2.0
        d = an * d + b
        if abs(d) < tiny:
            d = tiny
        c = b + an / c
        if abs(c) < tiny:
            c = tiny
        d = 1.0 / d
        delta = d * c
        h *= delta
        if abs(delta - 1.0) < _EPS:
            return cmath.exp(-x + a * math.log(x)) * h
    raise ArithmeticError(f"incomplete gamma continued fraction failed: a={a}, x={x}")


def _gser_lower(a: complex, x: float) -> complex:
    """Series for the lower incomplete gamma(a, x); needs Re(a) > 0 or x small."""
    if x == 0.0:
        return 0j
    ap = a
    total = 1.0 / a
    term = total
    for _ in range(_MAXIT):
        ap = ap + 1
        term = term * (x / ap)
        total += term
        if abs(term) < abs(total) * _EPS:
            return total * cmath.exp(-x + a * math.log(x))
    raise ArithmeticError(f"incomplete gamma series failed: a={a}, x={x}")


def _exp1(x: float) -> float:
    """E_1(x) by power series; used only for small x."""
    total = -_EULER - math.log(x)
    term = 1.0
    for k in range(1, _MAXIT):
        term *= -x / k
        total -= term / k
        if abs(term / k) < abs(total) * _EPS + 1e-300:
            return total
    raise ArithmeticError(f"E1 series failed: x={x}")


def _upper_nonpos_int(N: int, x: float) -> float:
    """Gamma(-N, x) = x^{-N} E_{N+1}(x) via the exponential-integral ladder."""
    e = _exp1(x)
    emx = math.exp(-x)
    for j in range(1, N + 1):
        e = (emx - x * e) / j
    return e * x ** (-N)


def upper_gamma(a: complex, x: float) -> complex:
    """Gamma(a, x) = integral_x^inf t^{a-1} e^{-t} dt for complex a, real x >= 0."""
    a = complex(a)
    if x < 0:
        raise ValueError("argument x must be >= 0")
    if x == 0.0:
        if a.imag == 0 and a.real <= 0 and a.real == int(a.real):
            raise ValueError("Gamma(a, 0) diverges at nonpositive integer a")
        return complex(_gamma(a))
    if x >= max(0.33, a.real + 1.0):
        return _gcf(a, x)
    if a.real > 0:
        return complex(_gamma(a)) - _gser_lower(a, x)
    # small x, Re(a) <= 0: shift the order up, then recur back down
    if a.imag == 0 and abs(a.real - round(a.real)) < 1e-13:
        return complex(_upper_nonpos_int(int(-round(a.real)), x))
    shift = int(math.floor(1.0 - a.real)) + 1
    top = a + shift
    g = complex(_gamma(top)) - _gser_lower(top, x)
    logx = math.log(x)
    for j in range(shift, 0, -1):
        aj = a + (j - 1)
        g = (g - cmath.exp(-x + aj * logx)) / aj
    return g
