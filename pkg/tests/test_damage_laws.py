import math

import numpy as np
import pytest
from scipy import integrate

from cdfdamage import damage_laws as dl
from cdfdamage.damage_laws import DamageLaw
from cdfdamage.errors import ConfigurationError, DomainError, NoSmoothExpansionError


def law_matrix(G=1.0, ell=1.0):
    """All admissible laws with the default parameter sweep n in {0.5, 1, 2}."""
    laws = []
    for kind in dl.ADMISSIBLE_KINDS:
        if kind in ("power", "radical", "piecewise", "rational", "hypergeometric"):
            laws += [DamageLaw(kind, G=G, ell=ell, n=n) for n in (0.5, 1.0, 2.0)]
        else:
            laws.append(DamageLaw(kind, G=G, ell=ell))
    return laws


def _law_id(law):
    return f"{law.kind}-{law.n}"


# ---------------------------------------------------------------------------
# point values
# ---------------------------------------------------------------------------

def test_psi_point_examples():
    for law in law_matrix():
        assert dl.psi(law, 0.0) == 0.0
    exp = DamageLaw("exponential")
    assert dl.psi(exp, 50.0) == pytest.approx(1.0, abs=1e-12)  # saturation at G/ell
    # threshold law: psi(1) = 1*(1 - (1/2)(1/2)) with knee at 2
    power = DamageLaw("power", n=1.0)
    assert dl.psi(power, 1.0) == pytest.approx(0.75, rel=1e-14)
    assert dl.psi(power, 5.0) == pytest.approx(1.0, rel=1e-14)


def test_power_psi_against_survival_quadrature():
    # independent oracle: psi(phi) = integral of 1 - F(gamma * s)
    n = 1.0
    law = DamageLaw("power", n=n)
    gamma = n / (n + 1.0)  # Gl = 1
    for phi in (0.5, 1.0, 1.9, 2.5):
        val, _ = integrate.quad(lambda s: max(0.0, 1.0 - (gamma * s) ** n), 0.0, phi)
        assert dl.psi(law, phi) == pytest.approx(val, rel=1e-10)


def test_chisquare_two_equals_exponential():
    chi = DamageLaw("chisquare", n=2.0)
    exp = DamageLaw("exponential")
    grid = np.geomspace(1e-6, 1e3, 200)
    assert np.allclose(dl.psi(chi, grid), dl.psi(exp, grid), rtol=0, atol=1e-12)
    assert np.allclose(dl.degradation(chi, grid), dl.degradation(exp, grid), rtol=0, atol=1e-12)


def test_degradation_point_examples():
    for law in law_matrix():
        assert dl.degradation(law, 0.0) == pytest.approx(1.0, abs=1e-15)
    logi = DamageLaw("logistic")
    assert dl.degradation(logi, 1.0) == pytest.approx(1.0 / math.cosh(1.0) ** 2, rel=1e-12)
    rapid = DamageLaw("rapiddecay")
    assert dl.degradation(rapid, 1e-3) == pytest.approx(1.0, abs=1e-12)


def test_damage_is_one_minus_degradation():
    grid = np.geomspace(1e-4, 1e3, 50)
    for law in law_matrix():
        assert np.allclose(
            dl.damage(law, grid), 1.0 - np.asarray(dl.degradation(law, grid)), atol=1e-15
        )


def test_chisquare_counterexample_not_clamped():
    low = DamageLaw("chisquare", n=1.0)
    assert dl.degradation(low, 1e-6) > 1.0  # unbounded near 0, flagged not clamped
    high = DamageLaw("chisquare", n=4.0)
    assert dl.degradation(high, 1e-6) < 1e-3  # vanishing initial stiffness


def test_radical_governing_coefficient_matches_derivative():
    # the (n+1)-exponent governing coefficient vs the analytic derivative of psi:
    # the two agree identically; quantify the gap instead of assuming it
    for n in (0.5, 1.0, 1.7, 3.0):
        law = DamageLaw("radical", n=n)
        grid = np.geomspace(1e-5, 1e4, 300)
        gap = np.abs(
            np.asarray(dl.radical_governing_coefficient(law, grid))
            - np.asarray(dl.degradation(law, grid))
        )
        assert gap.max() <= 1e-15


# ---------------------------------------------------------------------------
# derivative consistency and admissibility
# ---------------------------------------------------------------------------

def _kink_points(law):
    if law.kind == "power":
        return [(law.n + 1.0) / law.n * law.Gl]
    if law.kind == "piecewise":
        return [law.Gl / (law.n + 1.0)]
    return []


@pytest.mark.parametrize("law", law_matrix(G=2.0, ell=0.5), ids=_law_id)
def test_degradation_equals_fd_of_psi(law):
    kinks = _kink_points(law)
    for phi in np.geomspace(1e-3 * law.Gl, 1e2 * law.Gl, 40):
        if any(abs(phi - kk) < 0.1 * kk for kk in kinks):
            continue
        g = dl.degradation(law, phi)
        if g < 1e-8:
            continue  # below what a finite difference of saturated psi resolves
        h = 1e-3 * phi
        fd = (
            dl.psi(law, phi - 2 * h)
            - 8.0 * dl.psi(law, phi - h)
            + 8.0 * dl.psi(law, phi + h)
            - dl.psi(law, phi + 2 * h)
        ) / (12.0 * h)
        assert abs(g - fd) <= 1e-6 * max(abs(g), 1e-9), phi


@pytest.mark.parametrize("law", law_matrix(), ids=_law_id)
def test_admissibility(law):
    report = dl.admissibility_report(law)
    assert report["d_at_zero"] == 0.0
    assert report["monotone"]
    assert report["d_limit"] >= 1.0 - 1e-4
    assert report["g_integral"] == pytest.approx(law.Gl, rel=1e-6)


@pytest.mark.parametrize("law", law_matrix(G=3.0, ell=2.0), ids=_law_id)
def test_saturation_levels(law):
    # 1e-3 deficit at phi = 1e3*Gl holds except for the two n = 2 members
    # whose survival decays like u^(-1/2); those are checked at their rate.
    phi_big = 1e3 * law.Gl
    ratio = dl.psi(law, phi_big) / law.Gl
    if law.kind == "radical" and law.n == 2.0:
        assert ratio >= 1.0 - 3.0 / math.sqrt(1e3)
        assert dl.psi(law, 4e6 * law.Gl) / law.Gl >= 1.0 - 1.1e-3
    elif law.kind == "piecewise" and law.n == 2.0:
        assert ratio >= 1.0 - 0.013
        assert dl.psi(law, 2e5 * law.Gl) / law.Gl >= 1.0 - 1.0e-3
    else:
        assert ratio >= 1.0 - 1.0e-3


def test_model_equivalences():
    grid = np.geomspace(1e-4, 50.0, 300)
    hyp1 = DamageLaw("hypergeometric", n=1.0)
    gud = DamageLaw("gudermannian")
    assert np.allclose(dl.psi(hyp1, grid), dl.psi(gud, grid), rtol=1e-10, atol=1e-12)
    hyp2 = DamageLaw("hypergeometric", n=2.0)
    logi = DamageLaw("logistic")
    assert np.allclose(dl.psi(hyp2, grid), dl.psi(logi, grid), rtol=1e-10, atol=1e-12)


def test_small_strain_linearity_gap():
    grid = np.linspace(1e-6, 0.3, 2000)
    exp_gap = np.max((grid - dl.psi(DamageLaw("exponential"), grid)) / grid)
    cau_gap = np.max((grid - dl.psi(DamageLaw("cauchy"), grid)) / grid)
    assert exp_gap <= 0.136 + 0.005
    assert cau_gap <= 0.0655 + 0.005


# ---------------------------------------------------------------------------
# Taylor coefficients
# ---------------------------------------------------------------------------

def test_taylor_matches_series():
    cases = {
        ("exponential", None): [1.0, -0.5, 1.0 / 6.0],
        ("cauchy", None): [1.0, 0.0, -math.pi**2 / 12.0],
        ("logistic", None): [1.0, 0.0, -1.0 / 3.0],
        ("halfnormal", None): [1.0, 0.0, -math.pi / 12.0],
        ("gudermannian", None): [1.0, 0.0, -math.pi**2 / 24.0],
        ("rational", 1.0): [1.0, -1.0, 1.0],
        ("rational", 2.0): [1.0, -3.0 / 4.0, 4.0 / 8.0],
    }
    for (kind, n), want in cases.items():
        got = dl.taylor_coefficients(DamageLaw(kind, n=n), order=3)
        assert got[0] == 1.0
        for g, w in zip(got[1:], want[1:]):
            if w == 0.0:
                assert abs(g) < 1e-7
            else:
                assert g == pytest.approx(w, rel=1e-4)


def test_taylor_hypergeometric_cubic():
    from cdfdamage.distributions import hypergeometric_norm

    for n in (1.0, 2.0, 3.0):
        c = hypergeometric_norm(n)
        got = dl.taylor_coefficients(DamageLaw("hypergeometric", n=n), order=3)
        assert got[2] == pytest.approx(-(n / 6.0) * c * c, rel=1e-4)


def test_taylor_scaling_with_length():
    law = DamageLaw("exponential", G=2.0, ell=0.25)
    got = dl.taylor_coefficients(law, order=3)
    assert got[1] == pytest.approx(-0.5 * law.ell / law.G, rel=1e-6)
    assert got[2] == pytest.approx((law.ell / law.G) ** 2 / 6.0, rel=1e-4)


def test_taylor_unsupported_kinds():
    assert dl.taylor_coefficients(DamageLaw("power", n=1.0)) == [1.0]
    assert dl.taylor_coefficients(DamageLaw("piecewise", n=1.0)) == [1.0]
    with pytest.raises(NoSmoothExpansionError):
        dl.taylor_coefficients(DamageLaw("rapiddecay"))
    with pytest.raises(NoSmoothExpansionError):
        dl.taylor_coefficients(DamageLaw("chisquare", n=4.0))
    # the chi-square law with n = 2 is the exponential law
    assert dl.taylor_coefficients(DamageLaw("chisquare", n=2.0), order=2)[1] == pytest.approx(
        -0.5, rel=1e-6
    )


# ---------------------------------------------------------------------------
# calibration
# ---------------------------------------------------------------------------

def test_calibration_constants_reference_decimals():
    # the printed six-digit constants are the reciprocal of the consistent
    # values; the stored constants must reproduce the peak coefficients
    C_logi, numeric = dl.calibration_constant("logistic")
    assert not numeric
    assert 1.0 / C_logi == pytest.approx(0.619514, abs=1e-6)
    C_gud, _ = dl.calibration_constant("gudermannian")
    assert 1.0 / C_gud == pytest.approx(0.570084, abs=1e-6)
    C_hn, _ = dl.calibration_constant("halfnormal")
    assert 1.0 / C_hn == pytest.approx(2.0 / math.sqrt(math.e * math.pi), rel=1e-12)
    assert dl.calibration_constant("exponential")[0] == pytest.approx(math.e, rel=1e-15)
    assert dl.calibration_constant("cauchy")[0] == pytest.approx(
        4.0 * math.pi / 3.0**1.5, rel=1e-15
    )
    assert dl.calibration_constant("piecewise", 3.0)[0] == pytest.approx(2.0, rel=1e-15)


def test_numeric_calibration_flagged():
    for kind, n in [("rational", 1.0), ("rapiddecay", None), ("hypergeometric", 1.5),
                    ("chisquare", 3.0), ("power", 1.0)]:
        C, numeric = dl.calibration_constant(kind, n)
        assert numeric and C > 0.0
    with pytest.raises(DomainError):
        dl.calibration_constant("chisquare", 1.0)


def test_calibrate_length_validation():
    with pytest.raises(DomainError):
        dl.calibrate_length("exponential", -1.0, 1.0, 1.0)
    with pytest.raises(ConfigurationError):
        DamageLaw("exponential", G=-1.0)
    with pytest.raises(DomainError):
        dl.psi(DamageLaw("exponential"), -0.5)
