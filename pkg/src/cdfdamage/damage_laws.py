"""Softening laws generated by CDFs of the tensile strain-energy density.

Each law stores fracture energy G and internal length ell; the ratio
Gl = G/ell is the saturation energy density. For a law with CDF F the
stored tensile energy is psi(phi) = integral_0^phi (1 - F_scaled(s)) ds,
the degradation factor is g = d(psi)/d(phi) = 1 - F_scaled, and the
damage variable is d = 1 - g.

The chi-square kind with n != 2 is retained as an executable
counterexample: its degradation factor is unbounded near zero for n < 2
and vanishes there for n > 2, so it is exempt from the [0, 1] bounds and
never clamped.
"""

from __future__ import annotations

import math
from dataclasses import dataclass

import numpy as np

from . import special
from .distributions import hypergeometric_norm, sech_power_integral
from .errors import ConfigurationError, DomainError, NoSmoothExpansionError

LAW_KINDS = (
    "power",
    "exponential",
    "cauchy",
    "radical",
    "chisquare",
    "logistic",
    "halfnormal",
    "gudermannian",
    "hypergeometric",
    "piecewise",
    "rational",
    "rapiddecay",
)
_PARAMETRIC = ("power", "radical", "chisquare", "hypergeometric", "piecewise", "rational")

# Kinds that are admissible degradation maps for every admitted parameter
# (everything except the chi-square counterexample).
ADMISSIBLE_KINDS = tuple(k for k in LAW_KINDS if k != "chisquare")


def _sech_np(x):
    # overflow-safe array sech
    ax = np.abs(x)
    e = np.exp(-np.minimum(ax, 710.0))
    return 2.0 * e / (1.0 + e * e)


def _bisect(f, lo: float, hi: float, iters: int = 200) -> float:
    flo = f(lo)
    for _ in range(iters):
        mid = 0.5 * (lo + hi)
        if f(mid) * flo > 0.0:
            lo = mid
        else:
            hi = mid
    return 0.5 * (lo + hi)


# Dimensionless peak states u* = phi*/Gl of the 1D effective stress, from
# g(u) + 2u g'(u) = 0. The logistic and Gudermannian roots are transcendental
# (4u tanh u = 1 and 2v tanh v = 1).
_U_LOGISTIC = _bisect(lambda u: 4.0 * u * math.tanh(u) - 1.0, 0.1, 1.0)
_V_GUDERMANNIAN = _bisect(lambda v: 2.0 * v * math.tanh(v) - 1.0, 0.1, 2.0)


@dataclass(frozen=True)
class DamageLaw:
    """A named softening law with fracture constants G (energy/area) and ell (length)."""

    kind: str
    G: float = 1.0
    ell: float = 1.0
    n: float | None = None

    def __post_init__(self):
        if self.kind not in LAW_KINDS:
            raise ConfigurationError(f"unknown damage-law kind '{self.kind}'")
        if not (self.G > 0.0 and self.ell > 0.0):
            raise ConfigurationError("G and ell must be positive")
        if self.kind in _PARAMETRIC:
            if self.n is None or not (self.n > 0.0):
                raise ConfigurationError(f"kind '{self.kind}' requires a positive n")
            if self.kind == "rational" and not (0.5 <= self.n <= 2.0):
                raise ConfigurationError(f"rational n must lie in [0.5, 2], got {self.n}")
        elif self.n is not None:
            raise ConfigurationError(f"kind '{self.kind}' takes no shape parameter")

    @property
    def Gl(self) -> float:
        """Saturation energy density G/ell."""
        return self.G / self.ell


def _check_phi(phi):
    arr = np.asarray(phi, dtype=float)
    if np.any(arr < 0.0) or not np.all(np.isfinite(arr)):
        raise DomainError("strain-energy density must be finite and >= 0")
    return arr


def psi(law: DamageLaw, phi):
    """Stored tensile energy density; saturates at G/ell (chi-square included)."""
    u = _check_phi(phi) / law.Gl
    scalar = np.isscalar(phi)
    n = law.n
    k = law.kind
    if k == "exponential":
        out = law.Gl * (-np.expm1(-u))
    elif k == "cauchy":
        out = (2.0 * law.Gl / np.pi) * np.arctan(0.5 * np.pi * u)
    elif k == "logistic":
        out = law.Gl * np.tanh(u)
    elif k == "halfnormal":
        out = law.Gl * np.vectorize(special.erf)(0.5 * math.sqrt(math.pi) * u)
    elif k == "gudermannian":
        out = (4.0 * law.Gl / np.pi) * np.arctan(np.tanh(0.25 * np.pi * u))
    elif k == "radical":
        out = law.Gl * u / (1.0 + u ** (1.0 / n)) ** n
    elif k == "rational":
        out = law.Gl * u * (u + n * n) / (u + n) ** 2
    elif k == "rapiddecay":
        with np.errstate(divide="ignore", over="ignore"):
            out = np.where(u <= 1e-12, law.Gl * u, law.Gl * u * (-np.expm1(-1.0 / np.maximum(u, 1e-300))))
    elif k == "power":
        cap = (n + 1.0) / n
        w = np.minimum(u, cap)
        out = law.Gl * np.where(
            u <= cap, w * (1.0 - (n * w / (n + 1.0)) ** n / (n + 1.0)), 1.0
        )
    elif k == "piecewise":
        knee = 1.0 / (n + 1.0)
        w = np.maximum(u, knee)
        out = law.Gl * np.where(
            u <= knee, u, 1.0 - (n / (n + 1.0)) * ((n + 1.0) * w) ** (-1.0 / n)
        )
    elif k == "chisquare":
        out = law.Gl * np.vectorize(special.reg_lower_gamma)(0.5 * n, np.maximum(u, 0.0))
    elif k == "hypergeometric":
        c = hypergeometric_norm(n)
        out = (law.Gl / c) * np.vectorize(sech_power_integral)(n, c * u)
    else:
        raise ConfigurationError(k)
    return float(out) if scalar else out


def degradation(law: DamageLaw, phi):
    """Stiffness-reduction factor g = d(psi)/d(phi); in [0, 1] except chi-square n != 2."""
    u = _check_phi(phi) / law.Gl
    scalar = np.isscalar(phi)
    n = law.n
    k = law.kind
    if k == "exponential":
        out = np.exp(-u)
    elif k == "cauchy":
        out = 1.0 / (1.0 + (0.5 * np.pi * u) ** 2)
    elif k == "logistic":
        out = _sech_np(u) ** 2
    elif k == "halfnormal":
        out = np.exp(-0.25 * np.pi * u * u)
    elif k == "gudermannian":
        out = _sech_np(0.5 * np.pi * u)
    elif k == "radical":
        out = (1.0 + u ** (1.0 / n)) ** (-(n + 1.0))
    elif k == "rational":
        out = ((2.0 * n - n * n) * u + n**3) / (u + n) ** 3
    elif k == "rapiddecay":
        with np.errstate(divide="ignore", over="ignore"):
            w = np.maximum(u, 1e-300)
            out = np.where(u <= 1e-12, 1.0, -np.expm1(-1.0 / w) - np.exp(-1.0 / w) / w)
    elif k == "power":
        out = np.maximum(0.0, 1.0 - (n * u / (n + 1.0)) ** n)
    elif k == "piecewise":
        knee = 1.0 / (n + 1.0)
        w = np.maximum(u, knee)
        out = np.where(u <= knee, 1.0, ((n + 1.0) * w) ** (-(n + 1.0) / n))
    elif k == "chisquare":
        with np.errstate(divide="ignore"):
            w = np.asarray(u, dtype=float)
            out = np.where(
                w > 0.0,
                np.power(np.maximum(w, 1e-300), 0.5 * n - 1.0) * np.exp(-w) / math.gamma(0.5 * n),
                1.0 if n == 2.0 else (np.inf if n < 2.0 else 0.0),
            )
    elif k == "hypergeometric":
        c = hypergeometric_norm(n)
        out = _sech_np(c * u) ** n
    else:
        raise ConfigurationError(k)
    return float(out) if scalar else out


def damage(law: DamageLaw, phi):
    """Damage variable d = 1 - degradation (the per-kind formulas all reduce to this)."""
    out = 1.0 - np.asarray(degradation(law, phi))
    return float(out) if np.isscalar(phi) else out


def radical_governing_coefficient(law: DamageLaw, phi):
    """Stress coefficient of the radical model's governing equation.

    Stated with exponent n+1; the analytic derivative of psi telescopes
    to exactly the same expression, so this equals degradation() to
    round-off. Kept as a separate entry point so the agreement is
    testable rather than assumed.
    """
    if law.kind != "radical":
        raise DomainError("governing coefficient defined for the radical kind only")
    u = _check_phi(phi) / law.Gl
    out = (1.0 + u ** (1.0 / law.n)) ** (-(law.n + 1.0))
    return float(out) if np.isscalar(phi) else out


# ---------------------------------------------------------------------------
# 1D peak response (dimensionless) and length-scale calibration
# ---------------------------------------------------------------------------

def peak_state_dimensionless(kind: str, n: float | None = None):
    """(u*, g*) at the 1D stress peak, with u = phi/Gl, where a closed form exists.

    Returns None if the kind has no closed-form peak (numeric search applies).
    """
    if kind == "exponential":
        return 0.5, math.exp(-0.5)
    if kind == "cauchy":
        return 2.0 / (math.sqrt(3.0) * math.pi), 0.75
    if kind == "logistic":
        u = _U_LOGISTIC
        return u, special.sech(u) ** 2
    if kind == "halfnormal":
        return 1.0 / math.sqrt(math.pi), math.exp(-0.25)
    if kind == "gudermannian":
        v = _V_GUDERMANNIAN
        return 2.0 * v / math.pi, special.sech(v)
    if kind == "radical":
        u = (n / (n + 2.0)) ** n
        return u, (1.0 + n / (n + 2.0)) ** (-(n + 1.0))
    if kind == "piecewise":
        return 1.0 / (n + 1.0), 1.0
    return None


_CALIBRATION_CONSTANTS = {
    # G/ell = C * sigma_max^2 / k. The three decimal constants are stored as
    # the exact reciprocal-square of the peak-stress coefficient; see
    # calibration_constant() for the consistency relation C = 1/(2 u* g*^2).
    "exponential": math.e,
    "cauchy": 4.0 * math.pi / 3.0**1.5,
    "halfnormal": 0.5 * math.sqrt(math.e * math.pi),
}


def calibration_constant(kind: str, n: float | None = None, numeric_bracket: float = 10.0):
    """Dimensionless C in G/ell = C sigma_max^2 / k, plus a 'numeric' flag.

    For kinds with a closed-form peak, C follows from the peak state exactly;
    the rest maximize the dimensionless stress numerically.
    """
    if kind in _CALIBRATION_CONSTANTS:
        return _CALIBRATION_CONSTANTS[kind], False
    if kind == "radical":
        r = n / (n + 2.0)
        return (1.0 + r) ** (2.0 * (n + 1.0)) / (2.0 * r**n), False
    if kind == "piecewise":
        return 0.5 * (n + 1.0), False
    peak = peak_state_dimensionless(kind, n)
    if peak is not None:
        u, g = peak
        return 1.0 / (2.0 * u * g * g), False
    if kind == "chisquare" and (n is None or n < 2.0):
        raise DomainError("chi-square calibration defined for n >= 2 only")
    law = DamageLaw(kind, G=1.0, ell=1.0, n=n)
    eps, sig = _golden_peak(law, 1.0)
    return 1.0 / (sig * sig), True


def calibrate_length(kind: str, sigma_max: float, k: float, G: float, n: float | None = None):
    """Internal length ell from the measured peak stress: ell = G k / (C sigma_max^2).

    Returns (ell, numeric_flag); numeric_flag marks kinds whose constant
    comes from numeric maximization rather than a closed form.
    """
    if not (sigma_max > 0.0 and k > 0.0 and G > 0.0):
        raise DomainError("sigma_max, k, G must be positive")
    C, numeric = calibration_constant(kind, n)
    return G * k / (C * sigma_max * sigma_max), numeric


def _golden_peak(law: DamageLaw, k: float):
    """Golden-section maximization of the 1D effective stress; returns (eps*, sigma*)."""
    def stress(e):
        return degradation(law, 0.5 * k * e * e) * k * e

    a, b = 0.0, 10.0 * math.sqrt(2.0 * law.Gl / k)
    invphi = (math.sqrt(5.0) - 1.0) / 2.0
    c = b - invphi * (b - a)
    d = a + invphi * (b - a)
    fc, fd = stress(c), stress(d)
    # ties move the right bound: threshold laws are flat-zero past cutoff
    while (b - a) > 1e-12 * max(b, 1.0):
        if fc >= fd:
            b, d, fd = d, c, fc
            c = b - invphi * (b - a)
            fc = stress(c)
        else:
            a, c, fc = c, d, fd
            d = a + invphi * (b - a)
            fd = stress(d)
    e = 0.5 * (a + b)
    return e, stress(e)


# ---------------------------------------------------------------------------
# Taylor expansion of psi at zero
# ---------------------------------------------------------------------------

_SMOOTH_KINDS = (
    "exponential",
    "cauchy",
    "logistic",
    "halfnormal",
    "gudermannian",
    "hypergeometric",
    "rational",
)


def taylor_coefficients(law: DamageLaw, order: int = 3):
    """Leading Taylor coefficients of psi at phi = 0, [1, c2, c3][:order].

    Computed by Richardson-extrapolated finite differences of the exact
    psi; the linear coefficient is 1 by construction. Kinds whose psi is
    not smooth at 0 raise NoSmoothExpansionError; the two threshold laws
    are exact up to their first branch point and report only the linear
    term beyond which no universal polynomial exists.
    """
    if not 1 <= order <= 3:
        raise DomainError("order must be 1, 2, or 3")
    kind = law.kind
    if kind in ("power", "piecewise"):
        return [1.0][:order]
    if kind == "chisquare" and law.n == 2.0:
        kind = "exponential"
    if kind not in _SMOOTH_KINDS:
        raise NoSmoothExpansionError(f"no smooth expansion at 0 for kind '{kind}'")

    ref = DamageLaw(kind, G=1.0, ell=1.0, n=law.n if kind in _PARAMETRIC else None)

    def q2(h):
        return (psi(ref, h) - h) / (h * h)

    a2 = _richardson(q2, 0.2, levels=6)

    def q3(h):
        return (psi(ref, h) - h - a2 * h * h) / h**3

    a3 = _richardson(q3, 0.2, levels=6)
    coeffs = [1.0, a2 * law.ell / law.G, a3 * (law.ell / law.G) ** 2]
    return coeffs[:order]


def _richardson(f, h0: float, levels: int) -> float:
    # f(h) = L + b1 h + b2 h^2 + ...; eliminate powers of h over h0 * 2^-j
    table = [f(h0 * 0.5**j) for j in range(levels)]
    for m in range(1, levels):
        fac = 2.0**m
        table = [
            (fac * table[j + 1] - table[j]) / (fac - 1.0)
            for j in range(len(table) - 1)
        ]
    return table[0]


def admissibility_report(law: DamageLaw, grid_points: int = 1000):
    """Check the sufficiency conditions for an admissible degradation map.

    Returns a dict with d(0), monotonicity of d on a log grid, the limit
    of d, and the integral of g over [0, inf) which must equal G/ell.
    """
    from scipy import integrate

    lo, hi = 1e-6 * law.Gl, 1e6 * law.Gl
    grid = np.concatenate([[0.0], np.geomspace(lo, hi, grid_points)])
    d = damage(law, grid)
    mono = bool(np.all(np.diff(d) >= -1e-12))

    def g_of_t(t):
        # phi = Gl * t/(1-t) substitution
        u = t / (1.0 - t)
        return degradation(law, law.Gl * u) * law.Gl / (1.0 - t) ** 2

    pts = None
    if law.kind == "power":
        cap = (law.n + 1.0) / law.n
        pts = [cap / (1.0 + cap)]
    elif law.kind == "piecewise":
        knee = 1.0 / (law.n + 1.0)
        pts = [knee / (1.0 + knee)]
    integral, _ = integrate.quad(g_of_t, 0.0, 1.0, points=pts, limit=400,
                                 epsabs=1e-12, epsrel=1e-9)
    return {
        "d_at_zero": float(d[0]),
        "monotone": mono,
        "d_limit": float(d[-1]),
        "g_integral": integral,
        "saturation": law.Gl,
    }
