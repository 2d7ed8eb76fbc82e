import math

import numpy as np
import pytest
from hypothesis import given, settings
from hypothesis import strategies as st

from epicluster import model
from epicluster.model import DegenerateDeltaError, Regime

DEFAULT = model.validate(2.0, 0.5, 0.5)

params_st = st.builds(
    model.validate,
    st.floats(0.1, 5.0),
    st.floats(0.0, 1.0),
    st.floats(0.05, 3.0),
)


def test_derived_rates():
    assert DEFAULT.rho == 1.5
    assert DEFAULT.rates.iso_success == pytest.approx(1 / 3)
    assert DEFAULT.growth_q == pytest.approx(2 / 3)
    assert DEFAULT.rates.offspring_success == pytest.approx(1 / 3)


@pytest.mark.parametrize(
    "args",
    [(0.0, 0.5, 0.5), (-1.0, 0.5, 0.5), (1.0, -0.1, 0.5), (1.0, 1.1, 0.5), (1.0, 0.5, -0.1),
     (math.nan, 0.5, 0.5), (1.0, math.inf, 0.5)],
)
def test_validate_rejects(args):
    with pytest.raises(ValueError):
        model.validate(*args)


def test_validate_rejects_non_numbers():
    with pytest.raises(TypeError):
        model.validate("1", 0.5, 0.5)
    with pytest.raises(TypeError):
        model.validate(True, 0.5, 0.5)


def test_delta_zero_needs_explicit_mode():
    with pytest.raises(DegenerateDeltaError):
        model.validate(1.0, 0.5, 0.0)
    assert model.validate(1.0, 0.5, 0.0, detection_free=True).degenerate


def test_parameters_are_frozen():
    with pytest.raises(AttributeError):
        DEFAULT.gamma = 3.0


@pytest.mark.parametrize(
    "gpd, expected",
    [
        ((2.0, 0.5, 0.5), Regime.SUPERCRITICAL),
        ((2.0, 0.5, 1.0), Regime.CRITICAL),
        ((1.0, 0.9, 0.5), Regime.SUBCRITICAL),
        ((1.0, 1.0, 0.5), Regime.SUBCRITICAL),
        ((1.0, 0.5, 0.0), Regime.SUPERCRITICAL),
    ],
)
def test_regime(gpd, expected):
    assert model.regime(model.validate(*gpd, detection_free=True)) is expected


def test_tail_cutoff_default():
    K = model.tail_cutoff(DEFAULT)
    assert K == 71
    q, s = DEFAULT.growth_q, DEFAULT.rates.iso_success
    assert q**K / s < 1e-12 <= q ** (K - 1) / s


def test_tail_cutoff_p_zero():
    assert model.tail_cutoff(model.validate(2.0, 0.0, 0.5)) == 1


def test_tail_cutoff_needs_delta():
    with pytest.raises(DegenerateDeltaError):
        model.tail_cutoff(model.validate(1.0, 0.5, 0.0, detection_free=True))


@settings(max_examples=60, deadline=None)
@given(params_st, st.floats(0.0, 10.0))
def test_size_pmf_plus_isolation_is_one(params, t):
    K = 20_000
    total = float(np.sum(model.typical_size_pmf(params, t, np.arange(1, K + 1))))
    assert total + model.isolation_cdf(params, t) == pytest.approx(1.0, abs=1e-9)


@settings(max_examples=60, deadline=None)
@given(params_st, st.floats(0.0, 10.0))
def test_joint_law_marginal_is_isolation_cdf(params, t):
    k = np.arange(1, 20_001)
    assert float(np.sum(model.joint_final_size_cdf(params, t, k))) == pytest.approx(
        model.isolation_cdf(params, t), abs=1e-9
    )


def test_isolation_cdf_closed_form():
    # direct ratio of exponentials as an independent oracle
    for t in (0.0, 0.3, 1.0, 5.0):
        e = math.exp(1.5 * t)
        assert model.isolation_cdf(DEFAULT, t) == pytest.approx(0.5 * (e - 1) / (1.5 + 0.5 * (e - 1)), rel=1e-14)


def test_isolation_cdf_large_t_is_stable():
    assert model.isolation_cdf(DEFAULT, 1e4) == 1.0


def test_joint_law_as_t_grows_is_geometric():
    k = np.arange(1, 8)
    s = DEFAULT.rates.iso_success
    np.testing.assert_allclose(model.joint_final_size_cdf(DEFAULT, 200.0, k), s * (1 - s) ** (k - 1), rtol=1e-12)


def test_offspring_law():
    k = np.arange(0, 2000)
    pmf = model.offspring_pmf(DEFAULT, k)
    assert pmf.sum() == pytest.approx(1.0, abs=1e-14)
    assert np.dot(k, pmf) == pytest.approx(model.mean_offspring(DEFAULT), rel=1e-12)
    assert model.mean_offspring(DEFAULT) == 2.0


def test_untraceable_intensity_limits():
    assert model.untraceable_intensity(DEFAULT, 0.0) == 0.0
    assert model.untraceable_intensity(DEFAULT, 100.0) == pytest.approx(model.mean_offspring(DEFAULT))
    deg = model.validate(1.0, 0.5, 0.0, detection_free=True)
    assert model.untraceable_intensity(deg, 2.0) == pytest.approx(math.expm1(1.0))
    assert model.untraceable_intensity(model.validate(1.0, 0.0, 0.0, detection_free=True), 2.0) == 2.0


def test_untraceable_intensity_matches_integral():
    from scipy import integrate

    # (1-p) gamma E C(s) integrated over age
    val, _ = integrate.quad(lambda s: 0.5 * 2.0 * model.expected_size(DEFAULT, s), 0.0, 3.0)
    assert model.untraceable_intensity(DEFAULT, 3.0) == pytest.approx(val, rel=1e-10)


@pytest.mark.parametrize(
    "gpd, expected",
    [((2.0, 0.5, 0.5), 0.5), ((1.0, 0.9, 0.5), 1.0), ((2.0, 1.0, 0.5), 1.0), ((1.0, 0.5, 0.0), 0.0),
     ((3.0, 0.3, 0.7), 1 / 3)],
)
def test_extinction_probability(gpd, expected):
    assert model.extinction_probability(model.validate(*gpd, detection_free=True)) == pytest.approx(expected, rel=1e-14)


def test_expected_size_matches_pmf_mean():
    k = np.arange(1, 5000)
    for t in (0.5, 2.0):
        assert np.dot(k, model.typical_size_pmf(DEFAULT, t, k)) == pytest.approx(
            model.expected_size(DEFAULT, t), rel=1e-12
        )


def test_bad_arguments():
    with pytest.raises(ValueError):
        model.isolation_cdf(DEFAULT, -1.0)
    with pytest.raises(ValueError):
        model.typical_size_pmf(DEFAULT, 1.0, 0)
    with pytest.raises(DegenerateDeltaError):
        model.offspring_pmf(model.validate(1.0, 0.5, 0.0, detection_free=True), 1)
