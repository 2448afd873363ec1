# -*- encoding: utf-8

from hypothesis import given
from hypothesis.strategies import floats
import numpy as np
import pytest

from parlsm.errors import ConfigurationError
from parlsm.product import PutPayoff, exercise_value, in_the_money


PUT = PutPayoff(strike=40)


@pytest.mark.parametrize('spot, expected', [
    (40, 0),
    (30, 10),
    (45, 0),
    (0, 40),
])
def test_exercise_value(spot, expected):
    assert exercise_value(PUT, spot) == expected


@pytest.mark.parametrize('spot, expected', [
    (36, True),
    # At the money pays nothing
    (40, False),
    (44, False),
])
def test_in_the_money(spot, expected):
    assert in_the_money(PUT, spot) is expected


def test_exercise_value_works_on_arrays():
    spots = np.array([[30.0, 40.0], [45.0, 39.5]])
    assert np.array_equal(PUT.exercise_value(spots), [[10.0, 0.0], [0.0, 0.5]])
    assert np.array_equal(PUT.in_the_money(spots), [[True, False], [False, True]])


def test_strike_must_be_positive():
    with pytest.raises(ConfigurationError):
        PutPayoff(strike=0)


@given(floats(min_value=0, max_value=1000), floats(min_value=0, max_value=1000))
def test_exercise_value_is_non_negative_and_non_increasing(a, b):
    low, high = sorted([a, b])
    assert PUT.exercise_value(high) >= 0
    assert PUT.exercise_value(low) >= PUT.exercise_value(high)


@given(floats(min_value=0, max_value=1000))
def test_in_the_money_iff_positive_payoff(spot):
    assert bool(PUT.in_the_money(spot)) == (PUT.exercise_value(spot) > 0)
