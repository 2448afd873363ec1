# -*- encoding: utf-8

import math

from hypothesis import given, settings
from hypothesis.strategies import floats, integers
import numpy as np
import pytest

from parlsm.errors import ConfigurationError
from parlsm.market import (
    ExerciseSchedule, MarketParams, RngStream, discount, path_normals,
    simulate_path, simulate_paths
)


STANDARD_SETUP = MarketParams(spot=36, rate=0.06, vol=0.2, strike=40, maturity=1)
SCHEDULE = ExerciseSchedule.uniform(maturity=1, dates_per_year=50)


@pytest.mark.parametrize('kwargs, key', [
    ({'spot': 0}, 'spot'),
    ({'spot': -1}, 'spot'),
    ({'vol': -0.1}, 'vol'),
    ({'strike': 0}, 'strike'),
    ({'maturity': 0}, 'maturity'),
    ({'rate': float('nan')}, 'rate'),
])
def test_market_params_are_validated(kwargs, key):
    values = {'spot': 36, 'rate': 0.06, 'vol': 0.2, 'strike': 40, 'maturity': 1}
    values.update(kwargs)
    with pytest.raises(ConfigurationError) as err:
        MarketParams(**values)
    assert err.value.key == key


def test_zero_vol_is_allowed():
    assert MarketParams(spot=36, rate=0.06, vol=0, strike=40, maturity=1).vol == 0


class TestExerciseSchedule:

    def test_uniform_dates_exclude_today(self):
        assert SCHEDULE.count == 50
        assert SCHEDULE.dates[0] == pytest.approx(0.02)
        assert SCHEDULE.maturity == 1.0

    def test_two_year_schedule_has_fifty_dates_a_year(self):
        assert ExerciseSchedule.uniform(maturity=2, dates_per_year=50).count == 100

    @pytest.mark.parametrize('dates', [
        [],
        [0.0, 0.5, 1.0],
        [0.5, 0.5, 1.0],
        [0.7, 0.5, 1.0],
    ])
    def test_bad_dates_are_rejected(self, dates):
        with pytest.raises(ConfigurationError):
            ExerciseSchedule(dates=dates)

    def test_last_date_must_be_maturity(self):
        with pytest.raises(ConfigurationError):
            ExerciseSchedule(dates=[0.5, 0.9]).check_consistent(STANDARD_SETUP)

    def test_step_discounts(self):
        schedule = ExerciseSchedule(dates=[0.25, 0.5, 1.0])
        assert np.allclose(
            schedule.step_discounts(0.06),
            [math.exp(-0.06 * 0.25), math.exp(-0.06 * 0.5)]
        )


@pytest.mark.parametrize('rate, t1, t2, expected', [
    (0.06, 0, 1, 0.941765),
    (0.06, 0.3, 0.3, 1.0),
    (0.0, 0.2, 1.7, 1.0),
])
def test_discount(rate, t1, t2, expected):
    assert discount(rate, t1, t2) == pytest.approx(expected, abs=1e-6)


def test_discount_rejects_backwards_intervals():
    with pytest.raises(ValueError):
        discount(0.06, 1, 0.5)


def test_zero_vol_paths_follow_the_drift():
    params = MarketParams(spot=36, rate=0.06, vol=0, strike=40, maturity=1)
    paths = simulate_paths(params, SCHEDULE, master_seed=1, first_path=0, n_paths=3)
    expected = 36 * np.exp(0.06 * SCHEDULE.as_array())
    for row in paths:
        assert np.allclose(row, expected, rtol=1e-12, atol=0)


def test_paths_do_not_depend_on_how_they_are_split():
    everything = simulate_paths(STANDARD_SETUP, SCHEDULE, 42, first_path=0, n_paths=10)
    middle = simulate_paths(STANDARD_SETUP, SCHEDULE, 42, first_path=3, n_paths=4)
    assert np.array_equal(everything[3:7], middle)

    halves = np.vstack([
        simulate_paths(STANDARD_SETUP, SCHEDULE, 42, first_path=0, n_paths=5),
        simulate_paths(STANDARD_SETUP, SCHEDULE, 42, first_path=5, n_paths=5),
    ])
    assert np.array_equal(everything, halves)


def test_different_seeds_give_different_paths():
    a = simulate_paths(STANDARD_SETUP, SCHEDULE, 1, first_path=0, n_paths=2)
    b = simulate_paths(STANDARD_SETUP, SCHEDULE, 2, first_path=0, n_paths=2)
    assert not np.array_equal(a, b)


def test_simulate_path_matches_the_batch_row():
    grid = simulate_path(STANDARD_SETUP, SCHEDULE, RngStream(master_seed=7, path_index=11))
    batch = simulate_paths(STANDARD_SETUP, SCHEDULE, 7, first_path=11, n_paths=1)
    assert grid.path_index == 11
    assert len(grid) == SCHEDULE.count
    assert np.array_equal(grid.values, batch[0])


def test_stream_normals_match_path_normals():
    stream = RngStream(master_seed=3, path_index=5)
    assert np.array_equal(stream.normals(7), path_normals(3, 5, 1, 7)[0])


@pytest.mark.parametrize('kwargs', [
    {'master_seed': -1, 'path_index': 0},
    {'master_seed': 2 ** 64, 'path_index': 0},
    {'master_seed': 0, 'path_index': -3},
])
def test_bad_streams_are_rejected(kwargs):
    with pytest.raises(ConfigurationError):
        RngStream(**kwargs)


@given(
    spot=floats(min_value=1, max_value=200),
    vol=floats(min_value=0, max_value=1),
    rate=floats(min_value=-0.05, max_value=0.2),
    seed=integers(min_value=0, max_value=2 ** 32),
)
@settings(max_examples=25, deadline=None)
def test_paths_stay_positive(spot, vol, rate, seed):
    params = MarketParams(spot=spot, rate=rate, vol=vol, strike=40, maturity=1)
    paths = simulate_paths(params, SCHEDULE, seed, first_path=0, n_paths=20)
    assert paths.shape == (20, 50)
    assert np.all(paths > 0)


def test_normals_look_standard():
    z = path_normals(2013, 0, 20_000, 5).ravel()
    assert abs(z.mean()) < 4 / math.sqrt(z.size)
    assert abs(z.std() - 1) < 0.02


def _discounted_terminal_mean(n_paths, seed, chunk=100_000):
    total = 0.0
    total_sq = 0.0
    for first in range(0, n_paths, chunk):
        size = min(chunk, n_paths - first)
        x = simulate_paths(STANDARD_SETUP, SCHEDULE, seed, first, size)[:, -1]
        y = math.exp(-0.06) * x
        total += y.sum()
        total_sq += (y * y).sum()
    mean = total / n_paths
    se = math.sqrt((total_sq / n_paths - mean * mean) / n_paths)
    return mean, se


def test_discounted_spot_is_a_martingale():
    mean, se = _discounted_terminal_mean(20_000, seed=11)
    assert abs(mean - 36) < 4 * se


@pytest.mark.slow
def test_discounted_spot_is_a_martingale_at_a_million_paths():
    mean, se = _discounted_terminal_mean(1_000_000, seed=12)
    assert abs(mean - 36) < 3 * se
