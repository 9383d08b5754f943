import math

import numpy as np
import pytest
from scipy.integrate import quad
from scipy.special import erf

from levykit import spectral as sp
from levykit.diffusions import bessel_spec, brownian_spec, \
    spec_from_expressions
from levykit.errors import DomainError, ToleranceError, TruncationError, UnsupportedSpecError

BM = brownian_spec()
B15 = bessel_spec(1.5)
M_FULL_BM = sp.bessel_principal_measure(0.5)
M_KILL_BM = sp.bessel_killed_measure(0.5)
M_KILL_B15 = sp.bessel_killed_measure(0.25)


# ---------------------------------------------------------------------------
# frozen closed-form values (independent derivations, fixed once)
# ---------------------------------------------------------------------------

def test_brownian_transition_density_frozen():
    # reflected BM density wrt speed: (phi_t(x-y) + phi_t(x+y)) / 2
    got = sp.transition_density(BM, 0.5, 0.7, 1.0)
    assert abs(got - 0.2926143744793346) < 1e-9


def test_brownian_killed_density_frozen():
    got = sp.transition_density(BM, 0.5, 0.7, 1.0, killed=True)
    assert abs(got - 0.09842831949612159) < 1e-9


def test_brownian_density_from_boundary_frozen():
    got = sp.transition_density(BM, 0.0, 0.7, 1.0)
    assert abs(got - 0.31225393336676127) < 1e-9


def test_brownian_hitting_density_frozen():
    # x e^{-x^2/2t} / sqrt(2 pi t^3) at x = t = 1
    got = sp.hitting_density(BM, 1.0, 1.0)
    assert abs(got - math.exp(-0.5) / math.sqrt(2 * math.pi)) < 1e-12


def test_brownian_levy_density_frozen():
    assert abs(sp.levy_density(BM, 1.0) - 1 / math.sqrt(2 * math.pi)) < 1e-12


def test_brownian_hitting_tail_is_gaussian_band():
    got = sp.hitting_tail(BM, 1.0, 1.0)
    assert abs(got - 0.682689492137087) < 1e-12


def test_bessel_levy_tail_frozen_values():
    assert abs(sp.levy_tail(B15, 2.0) - 0.39006225108940673) < 1e-12
    assert abs(sp.levy_tail(B15, 10.0) - 0.2608503487533196) < 1e-12
    assert abs(sp.levy_tail(B15, 1e4) - 0.04638648042895005) < 1e-12


def test_bessel_levy_density_frozen():
    assert abs(sp.levy_density(B15, 2.0) - 0.04875778138617584) < 1e-12


def test_bessel_hitting_density_frozen():
    assert abs(sp.hitting_density(B15, 1.0, 2.0)
               - 0.07594519664875624) < 1e-12


def test_bessel_boundary_diagonal_frozen():
    assert abs(sp.transition_density(B15, 0.0, 0.0, 2.0)
               - 0.2885168693082349) < 1e-12


# ---------------------------------------------------------------------------
# quadrature route against the closed forms
# ---------------------------------------------------------------------------

def test_quadrature_matches_closed_transition():
    got = sp.transition_density(BM, 0.5, 0.7, 1.0, measure=M_FULL_BM)
    assert abs(got - 0.2926143744793346) < 1e-8


def test_quadrature_reports_honest_error():
    val, err = sp.transition_density(BM, 0.5, 0.7, 1.0, measure=M_FULL_BM,
                                     with_error=True)
    assert abs(val - 0.2926143744793346) <= max(err, 1e-8)
    assert 0 <= err < 1e-6


def test_quadrature_killed_and_hitting():
    got = sp.transition_density(BM, 0.5, 0.7, 1.0, killed=True,
                                measure=M_KILL_BM)
    assert abs(got - 0.09842831949612159) < 1e-8
    got = sp.hitting_density(BM, 1.0, 1.0, measure=M_KILL_BM)
    assert abs(got - 0.24197072451914337) < 1e-8


def test_quadrature_bessel_routes():
    for t in (0.5, 2.0):
        assert abs(sp.levy_tail(B15, t, measure=M_KILL_B15)
                   - B15.oracles.levy_tail(t)) < 1e-9
        assert abs(sp.hitting_density(B15, 1.0, t, measure=M_KILL_B15)
                   - B15.oracles.hitting_density(1.0, t)) < 1e-9


def test_generic_route_custom_brownian():
    # fully generic path: series eigenfunctions + explicit measure
    custom = spec_from_expressions("x", "2")
    got = sp.hitting_tail(custom, 1.0, 2.0, measure=M_KILL_BM)
    assert abs(got - erf(0.5)) < 1e-9


def test_generic_route_custom_bessel_density():
    custom = spec_from_expressions("x^0.5/0.5", "2*x^0.5")
    got = sp.hitting_density(custom, 1.0, 2.0, measure=M_KILL_B15)
    assert abs(got - 0.07594519664875624) < 1e-8


def test_custom_without_measure_is_rejected():
    custom = spec_from_expressions("x", "2")
    with pytest.raises(UnsupportedSpecError):
        sp.hitting_tail(custom, 1.0, 2.0)


# ---------------------------------------------------------------------------
# structural invariants
# ---------------------------------------------------------------------------

def test_transition_symmetry():
    for spec in (BM, B15):
        a = sp.transition_density(spec, 0.4, 1.1, 0.8)
        b = sp.transition_density(spec, 1.1, 0.4, 0.8)
        assert math.isclose(a, b, rel_tol=1e-12)


def test_killed_below_full():
    for spec in (BM, B15):
        for (x, y, t) in ((0.3, 0.6, 0.5), (1.0, 1.0, 2.0)):
            full = sp.transition_density(spec, x, y, t)
            killed = sp.transition_density(spec, x, y, t, killed=True)
            assert 0.0 <= killed <= full


def test_chapman_kolmogorov_brownian():
    x, y, t = 0.4, 0.9, 0.6
    lhs = sp.transition_density(BM, x, y, 2 * t)

    def integrand(z):
        return sp.transition_density(BM, x, z, t) \
            * sp.transition_density(BM, z, y, t) * 2.0  # m'(z) = 2

    val, _ = quad(integrand, 0.0, 12.0, limit=200)
    assert abs(val - lhs) < 1e-8


def test_hitting_tail_monotone_and_bounded():
    ts = [0.25, 0.5, 1.0, 2.0, 8.0]
    vals = [sp.hitting_tail(B15, 1.0, t) for t in ts]
    assert all(0.0 <= v <= 1.0 for v in vals)
    assert all(a >= b for a, b in zip(vals, vals[1:]))


def test_levy_tail_integrates_density():
    t = 1.5
    val, _ = quad(lambda s: sp.levy_density(B15, s), t, np.inf)
    assert abs(val - sp.levy_tail(B15, t)) < 1e-9


def test_total_transition_mass_is_one():
    # int p(t; x, y) m(dy) = 1 (recurrence, reflecting boundary)
    for spec in (BM, B15):
        val, _ = quad(lambda y: sp.transition_density(spec, 0.7, y, 0.9)
                      * spec.speed_density(y), 0.0, 15.0, limit=200)
        assert abs(val - 1.0) < 1e-8


def test_killed_mass_is_survival():
    # int phat(t; x, y) m(dy) = P_x(H_0 > t)
    x, t = 0.8, 0.7
    val, _ = quad(lambda y: sp.transition_density(BM, x, y, t, killed=True)
                  * 2.0, 0.0, 12.0, limit=200)
    assert abs(val - sp.hitting_tail(BM, x, t)) < 1e-8


# ---------------------------------------------------------------------------
# eigenfunction series
# ---------------------------------------------------------------------------

def test_eigenfunctions_at_zero_spectral_parameter():
    for spec in (BM, B15):
        for x in (0.5, 1.0, 2.0):
            assert math.isclose(sp.eigenfunction(spec, x, 0.0, kind="A"),
                                1.0)
            assert math.isclose(sp.eigenfunction(spec, x, 0.0, kind="C"),
                                float(spec.scale(x)))


def test_custom_series_matches_preset_eigenfunction():
    custom = spec_from_expressions("x^0.5/0.5", "2*x^0.5")
    for gamma in (0.5, 7.0, 60.0):
        for kind in ("A", "C"):
            a = sp.eigenfunction(custom, 1.0, gamma, kind=kind, tol=1e-10)
            b = sp.eigenfunction(B15, 1.0, gamma, kind=kind)
            assert abs(a - b) < 1e-8, (gamma, kind)


def test_truncation_error_carries_minimal_terms():
    series = sp.eigen_coefficients(BM, 1.0, kind="A", n_terms=3)
    with pytest.raises(TruncationError) as err:
        sp.eigen_value(series, 5.0, tol=1e-10)
    assert err.value.minimal_terms == 29
    longer = sp.eigen_coefficients(BM, 1.0, kind="A",
                                   n_terms=err.value.minimal_terms)
    val = sp.eigen_value(longer, 5.0, tol=1e-10)
    assert abs(val - sp.eigenfunction(BM, 1.0, 5.0, kind="A")) < 1e-9


def test_eigen_series_certification_cap():
    custom = spec_from_expressions("x", "2")
    with pytest.raises(ToleranceError):
        sp.eigenfunction(custom, 1.0, 1e9, kind="A", tol=1e-12)


# ---------------------------------------------------------------------------
# measures
# ---------------------------------------------------------------------------

def test_measure_from_table_reproduces_closed_forms():
    g = np.geomspace(1e-12, 2e3, 8000)
    tab = sp.measure_from_table(g, M_KILL_BM.density(g), kind="killed")
    assert abs(sp.levy_density(BM, 1.0, measure=tab)
               / BM.oracles.levy_density(1.0) - 1.0) < 1e-9
    tab15 = sp.measure_from_table(g, M_KILL_B15.density(g), kind="killed")
    for t in (2.0, 10.0):
        rel = abs(sp.levy_tail(B15, t, measure=tab15)
                  / B15.oracles.levy_tail(t) - 1.0)
        assert rel < 5e-3, t


def test_levy_exponent_from_measure():
    got = sp.levy_exponent_from_measure(M_KILL_BM, 2.0)
    assert abs(got - 2.0) < 1e-9


def test_domain_errors():
    with pytest.raises(DomainError):
        sp.transition_density(BM, -0.1, 0.5, 1.0)
    with pytest.raises(DomainError):
        sp.transition_density(BM, 0.1, 0.5, 0.0)
    with pytest.raises(DomainError):
        sp.hitting_density(BM, 0.0, 1.0)
