import json
import math

import numpy as np
import pytest
from scipy.special import erf, gamma

from levykit.diffusions import (band_occupancy_probability,
                                bessel_exponent_constant, bessel_spec,
                                brownian_spec, cumulative_speed,
                                levy_exponent, parse_spec_argument,
                                resolvent_at_zero, scale_speed_average,
                                series_bound_base, spec_from_expressions,
                                spec_from_json)
from levykit.errors import DomainError, UnsupportedSpecError
from levykit.exprlang import compile_expression


def test_bessel_preset_basic_functions():
    spec = bessel_spec(1.5)
    assert spec.alpha == 0.25
    assert spec.delta == 1.5
    assert spec.is_preset
    # S(x) = x^{2a}/(2a), m'(x) = 2 x^{1-2a}
    assert math.isclose(spec.scale(1.0), 2.0)
    assert math.isclose(spec.scale(4.0), 2.0 * 2.0)
    assert math.isclose(spec.speed_density(1.0), 2.0)
    assert math.isclose(spec.speed_density(4.0), 2.0 * 2.0)


def test_brownian_is_bessel_delta_one():
    bm = brownian_spec()
    assert bm.alpha == 0.5
    assert bm.delta == 1.0
    assert math.isclose(bm.scale(0.7), 0.7)
    assert math.isclose(bm.speed_density(123.0), 2.0)


def test_bessel_delta_range_is_open():
    for bad in (0.0, 2.0, -1.0, 2.5):
        with pytest.raises(DomainError):
            bessel_spec(bad)


def test_scale_vanishes_at_origin():
    for spec in (brownian_spec(), bessel_spec(0.5), bessel_spec(1.7)):
        assert spec.scale(0.0) == 0.0


def test_cumulative_speed_closed_forms():
    # M(x) = x^{2-2a}/(1-a)
    bm = brownian_spec()
    assert math.isclose(cumulative_speed(bm, 1.5), 3.0)
    b15 = bessel_spec(1.5)
    assert math.isclose(cumulative_speed(b15, 1.0), 4.0 / 3.0)


def test_series_bound_base_closed_forms():
    # B(x) = x^2 / (2(1-a))
    assert math.isclose(series_bound_base(brownian_spec(), 1.0), 1.0)
    assert math.isclose(series_bound_base(bessel_spec(1.5), 1.0), 2.0 / 3.0)


def test_series_bound_base_matches_definition_for_custom():
    # B = M(x) S(x) - int_0^x S dm, assembled from quadrature pieces
    spec = spec_from_expressions("x^0.5/0.5", "2*x^0.5")
    b = series_bound_base(spec, 1.3)
    ref = series_bound_base(bessel_spec(1.5), 1.3)
    assert abs(b - ref) < 1e-9


def test_scale_speed_average_is_band_mean_of_scale():
    bm = brownian_spec()
    # BM: int_0^e y 2dy / (2e) = e/2
    assert math.isclose(scale_speed_average(bm, 0.2), 0.1, rel_tol=1e-9)


def test_levy_exponent_closed_forms():
    bm = brownian_spec()
    # Phi(lam) = sqrt(2 lam)
    assert abs(levy_exponent(bm, 2.0) - 2.0) < 1e-9
    assert abs(levy_exponent(bm, 0.5) - 1.0) < 1e-9
    assert levy_exponent(bm, 0.0) == 0.0
    # Phi(lam) = kappa_a lam^a
    b15 = bessel_spec(1.5)
    kappa = bessel_exponent_constant(0.25)
    assert abs(kappa - 0.5684276788620944) < 1e-14
    assert abs(levy_exponent(b15, 1.0) - kappa) < 1e-9
    assert abs(levy_exponent(b15, 16.0) - 2.0 * kappa) < 1e-8


def test_bessel_exponent_constant_formula():
    for a in (0.25, 0.5, 0.75):
        expected = gamma(1.0 - a) * 2.0 ** (1.0 - a) / gamma(a)
        assert math.isclose(bessel_exponent_constant(a), expected)


def test_resolvent_is_reciprocal_exponent():
    b15 = bessel_spec(1.5)
    lam = 3.0
    assert math.isclose(resolvent_at_zero(b15, lam) * levy_exponent(b15, lam),
                        1.0, rel_tol=1e-12)
    with pytest.raises(DomainError):
        resolvent_at_zero(b15, 0.0)


def test_band_occupancy_matches_erf_for_brownian():
    bm = brownian_spec()
    s, eps = 0.37, 0.05
    got = band_occupancy_probability(bm, s, eps)
    assert abs(float(got) - erf(eps / math.sqrt(2.0 * s))) < 1e-12


def test_band_occupancy_custom_unsupported():
    spec = spec_from_expressions("x", "2")
    with pytest.raises(UnsupportedSpecError):
        band_occupancy_probability(spec, 1.0, 0.1)


def test_custom_spec_matches_equivalent_preset():
    custom = spec_from_expressions("x^0.5/0.5", "2*x^0.5")
    preset = bessel_spec(1.5)
    for x in (0.1, 0.9, 2.7):
        assert math.isclose(custom.scale(x), preset.scale(x), rel_tol=1e-12)
        assert math.isclose(custom.speed_density(x),
                            preset.speed_density(x), rel_tol=1e-12)
    assert not custom.is_preset
    assert custom.oracles is None


def test_spec_from_json_both_shapes():
    b = spec_from_json({"kind": "bessel", "delta": 1.5})
    assert b.alpha == 0.25
    c = spec_from_json('{"kind": "custom", "scale": "x", '
                       '"speed_density": "2"}')
    assert math.isclose(c.scale(0.4), 0.4)


def test_spec_from_json_rejects_garbage():
    with pytest.raises(DomainError):
        spec_from_json('{"kind": "bessel"')  # malformed
    with pytest.raises(DomainError):
        spec_from_json({"kind": "pendulum"})
    with pytest.raises(DomainError):
        spec_from_json({"kind": "custom", "scale": "x"})
    with pytest.raises(DomainError):
        spec_from_json([1, 2, 3])


def test_parse_spec_argument_forms(tmp_path):
    assert parse_spec_argument("brownian").delta == 1.0
    assert parse_spec_argument("bessel:1.5").alpha == 0.25
    assert parse_spec_argument('{"kind": "bessel", "delta": 0.5}').alpha \
        == 0.75
    path = tmp_path / "spec.json"
    path.write_text(json.dumps({"kind": "bessel", "delta": 1.2}))
    assert parse_spec_argument(str(path)).delta == 1.2
    with pytest.raises(DomainError):
        parse_spec_argument("bessel:two")
    with pytest.raises(DomainError):
        parse_spec_argument("no/such/file.json")


def test_expression_language_is_fenced():
    f = compile_expression("exp(-x) + sqrt(x)")
    assert math.isclose(f(1.0), math.exp(-1) + 1.0)
    for bad in ("__import__('os')", "x.real", "lambda y: y", "open('f')"):
        with pytest.raises((DomainError, UnsupportedSpecError, ValueError)):
            compile_expression(bad)


def test_expression_constants_broadcast():
    f = compile_expression("2")
    out = f(np.array([1.0, 2.0, 3.0]))
    assert out.shape == (3,)
    assert np.all(out == 2.0)
    assert isinstance(f(1.5), float)


def test_custom_spec_validation_rejects_bad_shapes():
    # decreasing "scale"
    with pytest.raises(DomainError):
        spec_from_expressions("-x", "2")
    # scale not vanishing at the origin
    with pytest.raises(DomainError):
        spec_from_expressions("x + 1", "2")
    # negative speed density
    with pytest.raises(DomainError):
        spec_from_expressions("x", "-2")


def test_oracle_tail_matches_density_by_quadrature():
    from scipy.integrate import quad
    spec = bessel_spec(1.5)
    t = 2.0
    val, _ = quad(lambda s: spec.oracles.levy_density(s), t, np.inf)
    assert abs(val - spec.oracles.levy_tail(t)) < 1e-10
