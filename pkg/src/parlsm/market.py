# -*- encoding: utf-8
"""Black-Scholes paths on the exercise-date grid.

Random numbers come from a Philox counter-based generator keyed by the
master seed.  Path ``j`` always reads the same block of counters, so the
variates on a path depend only on ``(master_seed, j)`` and never on how
the paths are split between workers or iterations.

"""

import math

import attr
import numpy as np
from scipy.special import ndtri

from parlsm import kernels
from parlsm.errors import ConfigurationError


# Philox4x64 emits four 64-bit words per counter increment.
_WORDS_PER_COUNTER = 4

# Keeps the inverse CDF finite if the generator ever returns exactly 0.
_SMALLEST_UNIFORM = 2.0 ** -54

_MAX_SEED = 2 ** 64 - 1


def _check(condition, message):
    def _validator(instance, attribute, value):
        if not condition(value):
            raise ConfigurationError(message, key=attribute.name)
    return _validator


@attr.s(frozen=True)
class MarketParams:
    spot = attr.ib(converter=float, validator=_check(lambda v: v > 0, 'must be positive'))
    rate = attr.ib(converter=float, validator=_check(math.isfinite, 'must be finite'))
    vol = attr.ib(converter=float, validator=_check(lambda v: v >= 0, 'must be non-negative'))
    strike = attr.ib(converter=float, validator=_check(lambda v: v > 0, 'must be positive'))
    maturity = attr.ib(converter=float, validator=_check(lambda v: v > 0, 'must be positive'))


def _to_dates(values):
    return tuple(float(v) for v in values)


@attr.s(frozen=True)
class ExerciseSchedule:
    """Exercise dates t_1 < ... < t_M, in years from today."""
    dates = attr.ib(converter=_to_dates)

    @dates.validator
    def _check_dates(self, attribute, value):
        if not value:
            raise ConfigurationError('needs at least one date', key='dates')
        if value[0] <= 0:
            raise ConfigurationError('dates must be after today', key='dates')
        if any(b <= a for a, b in zip(value, value[1:])):
            raise ConfigurationError('must be strictly increasing', key='dates')

    @classmethod
    def uniform(cls, maturity, dates_per_year):
        """Equally spaced dates t_k = k·T/M with M = round(dates_per_year·T)."""
        count = max(1, int(round(dates_per_year * maturity)))
        return cls(dates=[maturity * k / count for k in range(1, count + 1)])

    @property
    def count(self):
        return len(self.dates)

    @property
    def maturity(self):
        return self.dates[-1]

    def as_array(self):
        return np.array(self.dates)

    def check_consistent(self, params):
        if not math.isclose(self.maturity, params.maturity, rel_tol=1e-12):
            raise ConfigurationError(
                f'last exercise date {self.maturity} != maturity {params.maturity}',
                key='dates'
            )

    def step_discounts(self, rate):
        """Discount factors from each date to the next one."""
        dates = self.dates
        return np.array([
            discount(rate, t1, t2) for t1, t2 in zip(dates, dates[1:])
        ])


@attr.s(frozen=True, eq=False)
class PathGrid:
    path_index = attr.ib()
    values = attr.ib(converter=np.asarray)

    def __len__(self):
        return len(self.values)


@attr.s(frozen=True)
class RngStream:
    master_seed = attr.ib(converter=int)
    path_index = attr.ib(converter=int)

    @master_seed.validator
    def _check_seed(self, attribute, value):
        if not 0 <= value <= _MAX_SEED:
            raise ConfigurationError('must be a 64-bit unsigned integer', key='seed')

    @path_index.validator
    def _check_path_index(self, attribute, value):
        if value < 0:
            raise ConfigurationError('must be non-negative', key='path_index')

    def normals(self, n_dates):
        return path_normals(self.master_seed, self.path_index, 1, n_dates)[0]


def discount(rate, t1, t2):
    """Returns e^{-rate·(t2 - t1)}."""
    if t2 < t1:
        raise ValueError(f'Discount interval runs backwards: {t1} > {t2}')
    return math.exp(-rate * (t2 - t1))


def _counters_per_path(n_dates):
    return -(-n_dates // _WORDS_PER_COUNTER)


def path_uniforms(master_seed, first_path, n_paths, n_dates):
    """Uniforms in (0, 1) for paths ``first_path`` ... ``first_path + n_paths - 1``.

    Each path owns a fixed run of Philox counters, so any contiguous
    range of paths can be drawn independently and reproduces exactly
    the same rows.

    """
    per_path = _counters_per_path(n_dates)
    bit_generator = np.random.Philox(
        key=int(master_seed) & _MAX_SEED, counter=int(first_path) * per_path
    )
    generator = np.random.Generator(bit_generator)
    raw = generator.random((n_paths, per_path * _WORDS_PER_COUNTER))
    return np.maximum(raw[:, :n_dates], _SMALLEST_UNIFORM)


def path_normals(master_seed, first_path, n_paths, n_dates):
    return ndtri(path_uniforms(master_seed, first_path, n_paths, n_dates))


def simulate_paths(params, schedule, master_seed, first_path, n_paths):
    """Simulates a contiguous range of paths as an ``(n_paths, M)`` array.

    Stepping between exercise dates is exact lognormal:

        X_k = X_{k-1} · exp((r - σ²/2)·Δt_k + σ·√Δt_k·Z_k)

    """
    dates = schedule.as_array()
    steps = np.diff(dates, prepend=0.0)
    drift = (params.rate - 0.5 * params.vol ** 2) * steps
    diffusion = params.vol * np.sqrt(steps)
    normals = path_normals(master_seed, first_path, n_paths, schedule.count)
    out = np.empty_like(normals)
    kernels.step_paths(params.spot, drift, diffusion, normals, out)
    return out


def simulate_path(params, schedule, stream):
    schedule.check_consistent(params)
    values = simulate_paths(
        params, schedule, stream.master_seed, stream.path_index, n_paths=1
    )
    return PathGrid(path_index=stream.path_index, values=values[0])
