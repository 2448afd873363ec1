# -*- encoding: utf-8

import math

from hypothesis import given
from hypothesis.strategies import floats, integers
import numpy as np
import pytest

from parlsm.errors import ConfigurationError
from parlsm.weights import (
    WeightScheme, boundary_weight, weight_price, weight_uv_step
)


@pytest.mark.parametrize('i, expected', [
    (2, 0.2642),
    (4, 0.7293),
    (20, 1.0),
])
def test_weight_uv_step(i, expected):
    assert weight_uv_step(i, lam=2, mu=2) == pytest.approx(expected, abs=1e-4)


@pytest.mark.parametrize('i, expected', [
    (1, 0.5),
    (2, 0.8787),
    (10, 1.0),
])
def test_weight_price(i, expected):
    assert weight_price(i, nu=0.99) == pytest.approx(expected, abs=1e-4)


@pytest.mark.parametrize('spot, expected', [
    (30.0, 1.0),
    (38.0, math.exp(-0.5)),
    (22.0, math.exp(-0.5)),
    (110.0, math.exp(-50)),
])
def test_boundary_weight(spot, expected):
    assert boundary_weight(spot, boundary=30.0, beta=8.0) == pytest.approx(expected, rel=1e-12)


def test_boundary_weight_works_on_arrays():
    weights = boundary_weight(np.array([30.0, 38.0, 1e6]), boundary=30.0, beta=8.0)
    assert weights[0] == 1.0
    assert weights[2] == 0.0


@given(integers(min_value=1, max_value=500), floats(min_value=0, max_value=5))
def test_price_weight_is_in_range_and_grows(i, nu):
    w = weight_price(i, nu)
    assert 0.5 <= w <= 1
    assert weight_price(i + 1, nu) >= w


@given(integers(min_value=2, max_value=500))
def test_default_uv_weights_are_non_negative_and_grow(i):
    scheme = WeightScheme()
    assert 0 <= scheme.uv_factor(i) <= scheme.uv_factor(i + 1) <= 1


class TestWeightScheme:

    def test_defaults(self):
        scheme = WeightScheme()
        assert (scheme.lam, scheme.mu, scheme.nu) == (2.0, 2.0, 0.99)
        assert scheme.boundary_weights_enabled

    def test_defaults_are_valid_for_a_hundred_iterations(self):
        WeightScheme().validate(100)

    def test_negative_uv_weight_is_rejected(self):
        with pytest.raises(ConfigurationError) as err:
            WeightScheme(lam=3, mu=2).validate(5)
        assert err.value.key == 'lam'

    def test_single_iteration_never_scales(self):
        WeightScheme(lam=100, mu=1).validate(1)

    @pytest.mark.parametrize('kwargs, key', [
        ({'lam': -1}, 'lam'),
        ({'mu': 0}, 'mu'),
        ({'nu': -0.5}, 'nu'),
        ({'nu': float('inf')}, 'nu'),
        ({'beta': 0}, 'beta'),
        ({'beta': [1.0, -2.0]}, 'beta'),
        ({'beta_shrink': 0}, 'beta_shrink'),
        ({'beta_shrink': 1.5}, 'beta_shrink'),
    ])
    def test_bad_values_are_rejected(self, kwargs, key):
        with pytest.raises(ConfigurationError) as err:
            WeightScheme(**kwargs)
        assert err.value.key == key

    def test_default_beta_is_a_fifth_of_the_strike(self):
        assert np.allclose(WeightScheme().betas(strike=40, n_dates=3, i=1), [8.0] * 3)

    def test_beta_can_vary_by_date(self):
        widths = WeightScheme(beta=[1.0, 2.0]).betas(strike=40, n_dates=2, i=1)
        assert list(widths) == [1.0, 2.0]

    def test_beta_per_date_must_match_the_schedule(self):
        with pytest.raises(ConfigurationError) as err:
            WeightScheme(beta=[1.0, 2.0]).betas(strike=40, n_dates=3, i=1)
        assert err.value.key == 'beta'

    def test_beta_shrinks_each_iteration(self):
        scheme = WeightScheme(beta=4.0, beta_shrink=0.5)
        assert list(scheme.betas(strike=40, n_dates=1, i=1)) == [4.0]
        assert list(scheme.betas(strike=40, n_dates=1, i=3)) == [1.0]

    def test_effective_weights(self):
        scheme = WeightScheme()
        w2, w3 = scheme.uv_factor(2), scheme.uv_factor(3)
        assert np.allclose(scheme.effective_weights(3), [w2 * w3, w3, 1.0])

    def test_effective_weights_are_non_decreasing(self):
        weights = WeightScheme().effective_weights(100)
        assert weights[-1] == 1.0
        assert np.all(np.diff(weights) >= 0)
