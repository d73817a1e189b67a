"""Special-function kernels: erf, incomplete gamma, sech, gd, and Gauss 2F1.

Self-contained implementations (no scipy.special at runtime) so the
distribution and damage-law modules control their own accuracy budget:
erf and the incomplete gamma pair are good to ~1e-14 relative, the
hypergeometric series to ~1e-13 in the parameter regime used here
(a=1/2, b=(n+1)/2, c=3/2, z<=0, plus constant evaluations at z=-1).
"""

from __future__ import annotations

import math

from .errors import DomainError

_EPS = 1.0e-16
_MAX_ITER = 20000


def sech(x: float) -> float:
    """Hyperbolic secant, overflow-safe for large |x|."""
    ax = abs(x)
    if ax > 710.0:
        return 0.0
    e = math.exp(-ax)
    return 2.0 * e / (1.0 + e * e)


def gd(x: float) -> float:
    """Gudermannian-style sigmoid (4/pi)*arctan(tanh(pi*x/4)), saturating at 1."""
    return (4.0 / math.pi) * math.atan(math.tanh(0.25 * math.pi * x))


def _gamma_series(a: float, x: float) -> float:
    # Regularized lower incomplete gamma P(a, x) by power series; x < a + 1.
    term = 1.0 / a
    total = term
    n = a
    for _ in range(_MAX_ITER):
        n += 1.0
        term *= x / n
        total += term
        if abs(term) < abs(total) * _EPS:
            break
    return total * math.exp(-x + a * math.log(x) - math.lgamma(a))

def _gamma_cf(a: float, x: float) -> float:
    # Regularized upper incomplete gamma Q(a, x) by Lentz continued fraction; x >= a + 1.
    tiny = 1.0e-300
    b = x + 1.0 - a
    c = 1.0 / tiny
    d = 1.0 / b
    h = d
    for i in range(1, _MAX_ITER):
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
            break
    return h * math.exp(-x + a * math.log(x) - math.lgamma(a))


def reg_lower_gamma(a: float, x: float) -> float:
    """Regularized lower incomplete gamma P(a, x) = gamma(a, x)/Gamma(a)."""
    if a <= 0.0:
        raise DomainError(f"incomplete gamma requires a > 0, got a={a}")
    if x < 0.0:
        raise DomainError(f"incomplete gamma requires x >= 0, got x={x}")
    if x == 0.0:
        return 0.0
    if x < a + 1.0:
        return _gamma_series(a, x)
    return 1.0 - _gamma_cf(a, x)


def lower_incomplete_gamma(a: float, x: float) -> float:
    """Unnormalized lower incomplete gamma integral from 0 to x of t^(a-1) e^(-t)."""
    return reg_lower_gamma(a, x) * math.gamma(a)


def erf(x: float) -> float:
    """Gauss error function via the incomplete-gamma series/continued-fraction pair."""
    if x == 0.0:
        return 0.0
    s = 1.0 if x > 0 else -1.0
    ax = abs(x)
    if ax > 6.5:
        return s  # erfc < 1e-19, below double resolution of 1 - erfc
    return s * reg_lower_gamma(0.5, ax * ax)


def hyp2f1(a: float, b: float, c: float, z: float) -> float:
    """Gauss hypergeometric 2F1 for the half-line CDF regime (z <= 0.5).

    Direct power series for |z| <= 0.5; for z < -0.5 the Pfaff map
    w = z/(z-1) lands in [1/3, 1) where the series still converges.
    Arguments far outside this regime raise DomainError.
    """
    if c <= 0.0 and c == math.floor(c):
        raise DomainError(f"2F1 pole: c must not be a non-positive integer, got c={c}")
    if z > 0.5:
        raise DomainError(f"2F1 argument z={z} outside supported regime z <= 0.5")
    if z == 0.0:
        return 1.0
    if z < -0.5:
        # Pfaff: 2F1(a,b;c;z) = (1-z)^(-a) 2F1(a, c-b; c; z/(z-1))
        return (1.0 - z) ** (-a) * _hyp2f1_series(a, c - b, c, z / (z - 1.0))
    return _hyp2f1_series(a, b, c, z)


def _hyp2f1_series(a: float, b: float, c: float, w: float) -> float:
    term = 1.0
    total = 1.0
    for k in range(_MAX_ITER):
        term *= (a + k) * (b + k) / ((c + k) * (k + 1.0)) * w
        total += term
        if abs(term) < abs(total) * _EPS:
            return total
    raise DomainError(
        f"2F1 series did not converge for (a={a}, b={b}, c={c}, w={w})"
    )
