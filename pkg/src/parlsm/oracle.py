# -*- encoding: utf-8
"""Reference prices for the Monte Carlo engines.

The European put has a closed form.  The American put comes from a
fully implicit finite-difference scheme for the Black-Scholes PDE,

    ∂P/∂t + ½σ²S² ∂²P/∂S² + rS ∂P/∂S - rP = 0,

marched backwards from the payoff at maturity on a uniform grid in S,
with the value floored at the intrinsic value wherever exercise is
allowed.

"""

import logging
import math
import time

import attr
import numpy as np
from scipy.stats import norm

from parlsm import constants, kernels
from parlsm.errors import ConfigurationError, ConvergenceError
from parlsm.market import ExerciseSchedule
from parlsm.results import PricingResult


LOGGER = logging.getLogger(__name__)

FD_METHODS = ('projection', 'psor')

PSOR_OMEGA = 1.2
PSOR_TOLERANCE = 1e-10
PSOR_MAX_SWEEPS = 10_000

_STEP_TOLERANCE = 1e-9


def black_scholes_put(spot, strike, rate, vol, maturity):
    """European put value, including the degenerate σ=0 and T=0 cases."""
    if maturity <= 0:
        return max(strike - spot, 0.0)
    discounted_strike = strike * math.exp(-rate * maturity)
    if vol <= 0:
        return max(discounted_strike - spot, 0.0)

    sd = vol * math.sqrt(maturity)
    d1 = (math.log(spot / strike) + (rate + 0.5 * vol * vol) * maturity) / sd
    d2 = d1 - sd
    return float(discounted_strike * norm.cdf(-d2) - spot * norm.cdf(-d1))


def european_put_closed_form(params):
    return black_scholes_put(
        spot=params.spot,
        strike=params.strike,
        rate=params.rate,
        vol=params.vol,
        maturity=params.maturity
    )


@attr.s(frozen=True)
class FdGrid:
    n_time_steps = attr.ib(converter=int, default=constants.FD_TIME_STEPS)
    n_space_steps = attr.ib(converter=int, default=constants.FD_SPACE_STEPS)

    # None means FD_S_MAX_MULTIPLE times the strike.
    s_max = attr.ib(default=None)
    method = attr.ib(default='projection')

    @n_time_steps.validator
    def _check_time_steps(self, attribute, value):
        if value < 1:
            raise ConfigurationError('must be at least 1', key='fd_time_steps')

    @n_space_steps.validator
    def _check_space_steps(self, attribute, value):
        if value < 3:
            raise ConfigurationError('must be at least 3', key='fd_space_steps')

    @method.validator
    def _check_method(self, attribute, value):
        if value not in FD_METHODS:
            raise ConfigurationError(
                f'must be one of {FD_METHODS}, got {value!r}', key='fd_method'
            )

    def upper_spot(self, strike):
        if self.s_max is None:
            s_max = constants.FD_S_MAX_MULTIPLE * strike
        else:
            s_max = float(self.s_max)
        if not s_max > strike:
            raise ConfigurationError(
                f'must be above the strike {strike}', key='fd_s_max'
            )
        return s_max

    def spots(self, strike):
        return np.linspace(0.0, self.upper_spot(strike), self.n_space_steps + 1)


@attr.s(frozen=True, eq=False)
class FdSolution:
    """Today's value and the early-exercise boundary B(t).

    ``boundary`` holds (t, B) pairs in increasing t at every step where
    exercise was allowed; B is None if no grid node was exercised.

    """
    price = attr.ib(converter=float)
    boundary = attr.ib(converter=tuple)
    spots = attr.ib()
    values = attr.ib()
    wall_ms = attr.ib(default=0.0)

    def boundary_at(self, t):
        """The boundary at the exercise time closest to ``t``."""
        if not self.boundary:
            return None
        times = np.array([p[0] for p in self.boundary])
        return self.boundary[int(np.argmin(np.abs(times - t)))][1]

    def to_result(self, engine, config=None):
        return PricingResult(
            engine=engine,
            price=self.price,
            standard_error=0.0,
            timings={'solve': self.wall_ms, 'total': self.wall_ms},
            boundary=self.boundary,
            config=config or {},
        )


def _coefficients(spots, rate, vol, dt):
    # Central differences for the drift where they keep the matrix an
    # M-matrix, upwind differences elsewhere (only near S=0, or σ=0).
    i = np.arange(1, len(spots) - 1, dtype=float)
    diffusion = 0.5 * vol * vol * i * i
    drift = 0.5 * rate * i
    central = diffusion >= drift

    lower = np.where(central, -dt * (diffusion - drift), -dt * diffusion)
    upper = np.where(
        central, -dt * (diffusion + drift), -dt * (diffusion + 2 * drift)
    )
    diag = np.where(
        central,
        1.0 + dt * (2 * diffusion + rate),
        1.0 + dt * (2 * diffusion + 2 * drift + rate),
    )
    return lower, diag, upper


def _exercise_steps(params, grid, schedule):
    """Flags the time steps (counted back from maturity) with exercise."""
    exercise = np.zeros(grid.n_time_steps + 1, dtype=np.bool_)
    if schedule is None:
        exercise[1:] = True
        return exercise

    dt = params.maturity / grid.n_time_steps
    for t in schedule.dates:
        steps_back = (params.maturity - t) / dt
        s = int(round(steps_back))
        if abs(s - steps_back) > _STEP_TOLERANCE * grid.n_time_steps:
            raise ConfigurationError(
                f'exercise date {t} is not on the time grid', key='fd_time_steps'
            )
        exercise[s] = True
    return exercise


def _solve(params, grid, schedule):
    if schedule is not None:
        schedule.check_consistent(params)
    started = time.perf_counter()
    spots = grid.spots(params.strike)
    dt = params.maturity / grid.n_time_steps
    lower, diag, upper = _coefficients(spots, params.rate, params.vol, dt)

    intrinsic = np.maximum(params.strike - spots, 0.0)
    values = intrinsic.copy()
    steps = np.arange(grid.n_time_steps + 1)
    left_values = params.strike * np.exp(-params.rate * dt * steps)
    exercise = _exercise_steps(params, grid, schedule)
    boundary_nodes = np.full(grid.n_time_steps + 1, np.nan)

    failed = kernels.implicit_march(
        values, intrinsic, lower, diag, upper, left_values, exercise,
        grid.method == 'psor', PSOR_OMEGA, PSOR_TOLERANCE, PSOR_MAX_SWEEPS,
        boundary_nodes
    )
    if failed >= 0:
        raise ConvergenceError(step=int(failed), sweeps=PSOR_MAX_SWEEPS)

    ds = spots[1] - spots[0]
    boundary = []
    for s in range(grid.n_time_steps, 0, -1):
        if not exercise[s]:
            continue
        node = boundary_nodes[s]
        t = params.maturity - s * dt
        boundary.append((t, None if np.isnan(node) else float(node * ds)))

    wall_ms = (time.perf_counter() - started) * 1000
    price = float(np.interp(params.spot, spots, values))
    LOGGER.info(
        'FD price %.6f on a %dx%d grid in %.0f ms',
        price, grid.n_time_steps, grid.n_space_steps, wall_ms
    )
    return FdSolution(
        price=price,
        boundary=boundary,
        spots=spots,
        values=values,
        wall_ms=wall_ms,
    )


def american_put_fd(params, grid=None):
    """American put with exercise allowed at every time step."""
    return _solve(params, grid or FdGrid(), schedule=None)


def american_put_fd_bermudan(params, grid, schedule):
    """Same scheme, but exercise is only allowed on the schedule's dates.

    Every date must fall on the time grid.

    """
    return _solve(params, grid, schedule=schedule)


def european_put_fd(params, grid=None):
    return american_put_fd_bermudan(
        params, grid or FdGrid(), ExerciseSchedule(dates=[params.maturity])
    )
