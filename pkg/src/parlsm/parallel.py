# -*- encoding: utf-8
"""Iterative, fully parallel least-squares Monte Carlo.

Rather than storing every path and regressing backwards date by date,
the engine runs ``n`` iterations of ``m`` fresh paths each.  Paths in
iteration i are valued with the coefficients from iteration i-1, and
only add their contribution to the running normal equations; nothing
about a path outlives the iteration that simulated it.

Within an iteration each worker owns a contiguous range of path
indices and keeps private partial sums.  The coordinator merges the
partials in worker order, rescales the running sums, solves each block
and publishes the new coefficients for the next iteration.

"""

from concurrent.futures import ThreadPoolExecutor
import logging
import math
import time

import attr
import numpy as np

from parlsm import kernels
from parlsm.constants import GROUP_SIZE, RIDGE, RIDGE_MODE
from parlsm.errors import ConfigurationError, DegenerateRegressionError
from parlsm.market import discount, simulate_paths
from parlsm.product import PutPayoff
from parlsm.regression import (
    BasisSpec, CoefficientSet, NormalEquations, RIDGE_MODES, solve_coefficients
)
from parlsm.results import PricingResult, TraceRow
from parlsm.weights import WeightScheme


LOGGER = logging.getLogger(__name__)

# Largest number of paths a worker simulates in one go.
MAX_BATCH = 8192

# Coarse scan for the exercise boundary.  The floor and the bisection
# tolerance are fractions of the strike.
_BOUNDARY_SCAN_POINTS = 64
_BOUNDARY_FLOOR = 1e-3
_BOUNDARY_TOLERANCE = 1e-6


@attr.s(frozen=True)
class IterationPlan:
    n_iterations = attr.ib(converter=int)
    paths_per_iteration = attr.ib(converter=int)

    @n_iterations.validator
    def _check_n_iterations(self, attribute, value):
        if value < 1:
            raise ConfigurationError('must be at least 1', key='n_iterations')

    @paths_per_iteration.validator
    def _check_paths_per_iteration(self, attribute, value):
        if value < 1:
            raise ConfigurationError('must be at least 1', key='n_paths')

    @classmethod
    def from_total(cls, n_paths, n_iterations):
        """Splits ``n_paths`` evenly into ``n_iterations`` iterations."""
        if n_iterations < 1:
            raise ConfigurationError('must be at least 1', key='n_iterations')
        if n_paths % n_iterations:
            raise ConfigurationError(
                f'{n_paths} paths do not split evenly into '
                f'{n_iterations} iterations',
                key='n_paths'
            )
        return cls(
            n_iterations=n_iterations,
            paths_per_iteration=n_paths // n_iterations
        )

    @property
    def n_paths(self):
        return self.n_iterations * self.paths_per_iteration

    def first_path(self, i):
        """Index of the first path in iteration ``i`` (counting from 1)."""
        return (i - 1) * self.paths_per_iteration

    def worker_ranges(self, i, workers):
        """(first path, count) for each worker, in worker order.

        Every worker gets m // W paths and the last one also takes the
        remainder.  Workers with nothing to do are left out.

        """
        m = self.paths_per_iteration
        share = m // workers
        start = self.first_path(i)
        ranges = []
        for w in range(workers):
            count = share if w < workers - 1 else m - share * (workers - 1)
            if count:
                ranges.append((start, count))
            start += count
        return ranges


@attr.s
class PriceAccumulator:
    """Weighted running sums for the price and its standard error.

    A path priced in an iteration with weight w̃ adds w̃·P to the weighted
    sum, w̃ to the mass q, w̃² to q⁽²⁾ and w̃·P² to the squared sum.

    """
    weighted_sum = attr.ib(default=0.0)
    mass = attr.ib(default=0.0)
    mass_sq = attr.ib(default=0.0)
    weighted_sq_sum = attr.ib(default=0.0)

    def add(self, weight, total, total_sq, count):
        self.weighted_sum += weight * total
        self.mass += weight * count
        self.mass_sq += weight * weight * count
        self.weighted_sq_sum += weight * total_sq
        return self

    @property
    def price(self):
        if self.mass <= 0:
            raise ValueError('No paths have been priced yet')
        return self.weighted_sum / self.mass

    @property
    def variance(self):
        price = self.price
        return max(self.weighted_sq_sum / self.mass - price * price, 0.0)

    @property
    def standard_error(self):
        return math.sqrt(self.variance * self.mass_sq) / self.mass


@attr.s(frozen=True)
class BoundaryEstimate:
    """Estimated exercise boundary per date; None where there's no root."""
    values = attr.ib(converter=tuple)

    def at(self, date_index):
        return self.values[date_index]

    def as_array(self):
        return np.array([np.nan if v is None else v for v in self.values])


@attr.s(frozen=True, eq=False)
class PathDecision:
    """One path valued backwards under a fixed exercise policy.

    ``first_value`` is P_1 (the value at the first exercise date),
    ``held[k]`` is P̃_{k+1} discounted to t_k, and ``exercise_index[k]``
    is the first date >= k at which the path is exercised.

    """
    first_value = attr.ib(converter=float)
    held = attr.ib()
    exercise_index = attr.ib()


@attr.s(frozen=True, eq=False)
class IterationResult:
    iteration = attr.ib()
    normal_equations = attr.ib()
    price_sum = attr.ib()
    price_sq_sum = attr.ib()
    n_paths = attr.ib()
    wall_ms = attr.ib(default=0.0)


def _policy_arrays(coeffs, spec):
    if coeffs is None:
        coeffs = CoefficientSet.bootstrap(spec)
    return coeffs.as_arrays(spec.block_size)


def _continuation_curve(alpha, spec, spots, t):
    return spec.features(spots, t) @ alpha


def solve_boundary(coeffs, spec, payoff, date_index):
    """Spot at which exercising and holding are worth the same at one date.

    Scans down from the strike for the first sign change of
    g(x) = (K - x) - Ĉ(x), then bisects.  Returns None if g never
    changes sign, or if the date's block has no coefficients.

    """
    alpha = coeffs.alphas[spec.block_of(date_index)]
    if alpha is None:
        return None
    strike = float(payoff.strike)
    root = kernels.boundary_root(
        np.asarray(alpha, dtype=float), float(spec.dates[date_index]),
        spec.with_time, strike, _BOUNDARY_FLOOR * strike,
        _BOUNDARY_TOLERANCE * strike, _BOUNDARY_SCAN_POINTS
    )
    return None if math.isnan(root) else float(root)


def estimate_boundary(coeffs, spec, payoff):
    """Boundary at every date but maturity, where nothing is regressed."""
    alphas, known = coeffs.as_arrays(spec.block_size)
    strike = float(payoff.strike)
    roots = np.empty(spec.n_dates)
    kernels.boundary_roots(
        alphas, known, spec.date_blocks().astype(np.int64),
        np.asarray(spec.dates, dtype=float), spec.with_time, strike,
        _BOUNDARY_FLOOR * strike, _BOUNDARY_TOLERANCE * strike,
        _BOUNDARY_SCAN_POINTS, roots
    )
    return BoundaryEstimate(values=[
        None if math.isnan(r) else float(r) for r in roots
    ])


def _date_arrays(params, schedule, spec):
    return (
        schedule.step_discounts(params.rate),
        spec.date_blocks().astype(np.int64),
        schedule.as_array(),
    )


def decide_and_value_path(path, coeffs, payoff, schedule, rate, spec):
    """Values one path backwards; ``coeffs=None`` is the European policy.

    A date is an exercise date for the path if the put is in the money,
    the date's block has coefficients and F_k >= Ĉ_k.

    """
    alphas, known = _policy_arrays(coeffs, spec)
    values = np.asarray(path.values, dtype=float).reshape(1, -1)
    first, held, kappa = kernels.backward_values(
        values,
        payoff.exercise_value(values),
        schedule.step_discounts(rate),
        alphas,
        known,
        spec.date_blocks().astype(np.int64),
        schedule.as_array(),
        spec.with_time,
    )
    return PathDecision(
        first_value=first[0], held=held[0], exercise_index=kappa[0]
    )


def exercise_index_forward(path, coeffs, payoff, schedule, rate, spec):
    """Forward-scan twin of ``decide_and_value_path``.

    For every date k, looks ahead for the first exercise date κ_k >= k
    and discounts the payoff there back to t_k.  Quadratic in the number
    of dates, so only useful as a cross-check.

    """
    dates = schedule.dates
    last = len(dates) - 1
    spots = np.asarray(path.values, dtype=float)
    payoffs = payoff.exercise_value(spots)

    def exercised(k):
        if k == last:
            return True
        block = spec.block_of(k)
        if not payoffs[k] > 0 or coeffs is None or coeffs.alphas[block] is None:
            return False
        c = _continuation_curve(coeffs.alphas[block], spec, spots[k], dates[k])
        return payoffs[k] >= c[0]

    kappa = np.empty(len(dates), dtype=np.int64)
    values = np.empty(len(dates))
    for k in range(len(dates)):
        stop = next(j for j in range(k, len(dates)) if exercised(j))
        kappa[k] = stop
        values[k] = payoffs[stop] * discount(rate, dates[k], dates[stop])
    return kappa, values


def run_iteration(i, coeffs, params, schedule, spec, plan, seed,
                  boundary=None, betas=None, executor=None, workers=1):
    """Simulates and values the paths of iteration ``i``.

    Returns this iteration's own normal equations and price sums; the
    caller is responsible for folding them into the running totals.
    ``boundary=None`` means every date uses the in-the-money indicator.

    """
    start = time.perf_counter()
    payoff = PutPayoff(params.strike)
    alphas, known = _policy_arrays(coeffs, spec)
    disc, date_block, times = _date_arrays(params, schedule, spec)
    to_today = discount(params.rate, 0.0, schedule.dates[0])
    n_dates = schedule.count
    if boundary is None:
        centres = np.full(n_dates, np.nan)
    else:
        centres = boundary.as_array()
    if betas is None:
        betas = np.ones(n_dates)

    def run_range(first, count):
        ne = NormalEquations.zeros(spec)
        total = 0.0
        total_sq = 0.0
        for offset in range(0, count, MAX_BATCH):
            size = min(MAX_BATCH, count - offset)
            paths = simulate_paths(params, schedule, seed, first + offset, size)
            s, s2 = kernels.value_and_accumulate(
                paths, payoff.exercise_value(paths), disc, alphas, known,
                date_block, times, spec.with_time, centres, betas, to_today,
                ne.matrices, ne.vectors
            )
            total += s
            total_sq += s2
        return ne, total, total_sq

    ranges = plan.worker_ranges(i, workers)
    if executor is None:
        partials = [run_range(first, count) for first, count in ranges]
    else:
        futures = [executor.submit(run_range, first, count) for first, count in ranges]
        partials = [f.result() for f in futures]

    ne, total, total_sq = partials[0]
    for other_ne, other_total, other_sq in partials[1:]:
        ne.merge(other_ne)
        total += other_total
        total_sq += other_sq

    return IterationResult(
        iteration=i,
        normal_equations=ne,
        price_sum=total,
        price_sq_sum=total_sq,
        n_paths=plan.paths_per_iteration,
        wall_ms=(time.perf_counter() - start) * 1000,
    )


def mid_maturity_index(schedule):
    dates = schedule.as_array()
    return int(np.argmin(np.abs(dates - 0.5 * schedule.maturity)))


def _starting_coefficients(bootstrap, spec):
    if bootstrap is None or bootstrap == 'european':
        return None
    if isinstance(bootstrap, CoefficientSet):
        if bootstrap.fingerprint != spec.fingerprint:
            raise ConfigurationError(
                'warm-start coefficients were fitted for another basis',
                key='warm_start_file'
            )
        return bootstrap
    raise ConfigurationError(
        f'must be "european" or a set of coefficients, got {bootstrap!r}',
        key='bootstrap'
    )


def price_parallel(params, schedule, plan, weights=None, spec=None,
                   seed=0, bootstrap='european', workers=1, ridge=RIDGE,
                   ridge_mode=RIDGE_MODE):
    """Prices an American put with the iterative algorithm.

    :param bootstrap: ``'european'`` to never exercise early in the
        first iteration, or a ``CoefficientSet`` from an earlier run
        (a warm start).
    :param workers: Number of threads sharing each iteration's paths.
    :param ridge_mode: How the ridge is scaled; see ``solve_coefficients``.

    """
    weights = weights or WeightScheme()
    weights.validate(plan.n_iterations)
    schedule.check_consistent(params)
    if workers < 1:
        raise ConfigurationError('must be at least 1', key='workers')
    if ridge_mode not in RIDGE_MODES:
        raise ConfigurationError(
            f'must be one of {", ".join(RIDGE_MODES)}', key='ridge_mode'
        )
    if spec is None:
        spec = BasisSpec.for_schedule(schedule, group_size=GROUP_SIZE)
    if spec.dates != schedule.dates:
        raise ConfigurationError(
            'basis dates do not match the exercise schedule', key='group_size'
        )

    payoff = PutPayoff(params.strike)
    coeffs = _starting_coefficients(bootstrap, spec)
    running = NormalEquations.zeros(spec)
    prices = PriceAccumulator()
    boundary = None
    mid = mid_maturity_index(schedule)
    timings = {'paths': 0.0, 'regression': 0.0, 'boundary': 0.0}
    trace = []

    LOGGER.info(
        'Pricing with %d iterations of %d paths on %d workers',
        plan.n_iterations, plan.paths_per_iteration, workers
    )
    started = time.perf_counter()

    with ThreadPoolExecutor(max_workers=workers) as executor:
        for i in range(1, plan.n_iterations + 1):
            result = run_iteration(
                i, coeffs, params, schedule, spec, plan, seed,
                boundary=boundary,
                betas=weights.betas(params.strike, schedule.count, i),
                executor=executor if workers > 1 else None,
                workers=workers,
            )
            timings['paths'] += result.wall_ms

            t = time.perf_counter()
            if i > 1:
                running.scale(weights.uv_factor(i))
            running.merge(result.normal_equations)
            prices.add(
                weights.price_weight(i),
                result.price_sum, result.price_sq_sum, result.n_paths
            )
            if all(running.is_empty(b) for b in range(spec.n_blocks)):
                raise DegenerateRegressionError(
                    None, detail='no path has contributed to the regression'
                )
            coeffs = solve_coefficients(
                running, ridge=ridge, executor=executor, ridge_mode=ridge_mode
            )
            timings['regression'] += (time.perf_counter() - t) * 1000

            t = time.perf_counter()
            estimate = estimate_boundary(coeffs, spec, payoff)
            boundary = estimate if weights.boundary_weights_enabled else None
            timings['boundary'] += (time.perf_counter() - t) * 1000

            row = TraceRow(
                iteration=i,
                price=prices.price,
                standard_error=prices.standard_error,
                boundary=estimate.at(mid),
                wall_ms=(time.perf_counter() - started) * 1000,
            )
            trace.append(row)
            LOGGER.debug(
                'Iteration %d: price %.6f (se %.6f), boundary %s',
                i, row.price, row.standard_error, row.boundary
            )

    timings['total'] = (time.perf_counter() - started) * 1000
    LOGGER.info(
        'Parallel price %.6f (se %.6f) in %.0f ms',
        prices.price, prices.standard_error, timings['total']
    )

    return PricingResult(
        engine='parallel',
        price=prices.price,
        standard_error=prices.standard_error,
        n_paths=plan.n_paths,
        timings=timings,
        iteration_trace=trace,
        boundary=list(zip(schedule.dates, estimate.values)),
        config={
            'spot': params.spot,
            'rate': params.rate,
            'vol': params.vol,
            'strike': params.strike,
            'maturity': params.maturity,
            'n_dates': schedule.count,
            'n_paths': plan.n_paths,
            'n_iterations': plan.n_iterations,
            'group_size': spec.group_size,
            'basis': spec.functions,
            'lam': weights.lam,
            'mu': weights.mu,
            'nu': weights.nu,
            'beta_shrink': weights.beta_shrink,
            'boundary_weights': weights.boundary_weights_enabled,
            'seed': int(seed),
            'workers': int(workers),
            'ridge': float(ridge),
            'ridge_mode': ridge_mode,
            'bootstrap': (
                'warm_start' if isinstance(bootstrap, CoefficientSet)
                else 'european'
            ),
        },
        coefficients=coeffs,
    )
