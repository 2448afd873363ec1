# -*- encoding: utf-8
"""Longstaff-Schwartz: store every path, then regress backwards.

This is the baseline the iterative engine is measured against, so the
backward recursion runs on a single thread.  Only path generation can
optionally be split across workers.

"""

from concurrent.futures import ThreadPoolExecutor
import logging
import time

import attr
import numpy as np

from parlsm import constants
from parlsm.errors import ConfigurationError, DegenerateRegressionError
from parlsm.market import discount, simulate_paths
from parlsm.product import PutPayoff
from parlsm.regression import (
    BasisSpec, CoefficientSet, NormalEquations, RIDGE_MODES, solve_coefficients
)
from parlsm.results import PricingResult, format_number


LOGGER = logging.getLogger(__name__)


@attr.s(frozen=True)
class LsmConfig:
    n_paths = attr.ib(converter=int, default=constants.N_PATHS)

    # None means one date per block with the 1, S, S² basis.
    basis = attr.ib(default=None)
    seed = attr.ib(converter=int, default=constants.DEFAULT_SEED)
    parallel_paths = attr.ib(converter=bool, default=False)
    workers = attr.ib(converter=int, default=1)
    ridge = attr.ib(converter=float, default=constants.RIDGE)
    ridge_mode = attr.ib(default=constants.RIDGE_MODE)

    @basis.validator
    def _check_basis(self, attribute, value):
        if value is not None and value.group_size != 1:
            raise ConfigurationError(
                'the LSM engine regresses one date at a time', key='group_size'
            )

    @ridge_mode.validator
    def _check_ridge_mode(self, attribute, value):
        if value not in RIDGE_MODES:
            raise ConfigurationError(
                f'must be one of {", ".join(RIDGE_MODES)}', key='ridge_mode'
            )

    @workers.validator
    def _check_workers(self, attribute, value):
        if value < 1:
            raise ConfigurationError('must be at least 1', key='workers')

    def basis_for(self, schedule):
        if self.basis is not None:
            return self.basis
        return BasisSpec.for_schedule(schedule, group_size=1, functions='spot')

    def check(self, spec):
        if self.n_paths < spec.block_size:
            raise ConfigurationError(
                f'need at least {spec.block_size} paths to regress',
                key='n_paths'
            )


def _simulate_all(params, schedule, config):
    if not config.parallel_paths or config.workers == 1:
        return simulate_paths(params, schedule, config.seed, 0, config.n_paths)

    share = config.n_paths // config.workers
    ranges = [
        (w * share, share if w < config.workers - 1
         else config.n_paths - share * (config.workers - 1))
        for w in range(config.workers)
    ]
    with ThreadPoolExecutor(max_workers=config.workers) as executor:
        blocks = executor.map(
            lambda r: simulate_paths(params, schedule, config.seed, *r), ranges
        )
        return np.vstack(list(blocks))


def price_lsm(params, schedule, config=None):
    """Prices an American put by backward recursion over stored paths.

    At each date the discounted future cashflows of the in-the-money
    paths are regressed on the basis; those paths exercise if the payoff
    is at least the fitted continuation value.  Out-of-the-money paths
    always continue.

    """
    config = config or LsmConfig()
    schedule.check_consistent(params)
    spec = config.basis_for(schedule)
    config.check(spec)
    if spec.dates != schedule.dates:
        raise ConfigurationError(
            'basis dates do not match the exercise schedule', key='basis'
        )

    LOGGER.info('Pricing with LSM on %d stored paths', config.n_paths)
    started = time.perf_counter()
    paths = _simulate_all(params, schedule, config)
    payoffs = PutPayoff(params.strike).exercise_value(paths)
    timings = {'paths': (time.perf_counter() - started) * 1000}

    t = time.perf_counter()
    disc = schedule.step_discounts(params.rate)
    ne = NormalEquations.zeros(spec)
    alphas = [None] * spec.n_blocks
    value = payoffs[:, -1].copy()

    for k in range(schedule.count - 2, -1, -1):
        value *= disc[k]
        itm = np.flatnonzero(payoffs[:, k] > 0)
        if itm.size == 0:
            continue

        block = spec.block_of(k)
        features = spec.features(paths[itm, k], schedule.dates[k])
        ne.accumulate_batch(block, np.ones(itm.size), features, value[itm])
        try:
            alpha = solve_coefficients(
                ne, config.ridge, blocks=[block], ridge_mode=config.ridge_mode
            ).alphas[block]
        except DegenerateRegressionError as err:
            raise DegenerateRegressionError(block, date=k, detail=err.detail) from err
        alphas[block] = alpha

        exercise = itm[payoffs[itm, k] >= features @ alpha]
        value[exercise] = payoffs[exercise, k]

    timings['regression'] = (time.perf_counter() - t) * 1000
    timings['total'] = (time.perf_counter() - started) * 1000

    prices = discount(params.rate, 0.0, schedule.dates[0]) * value
    price = float(np.mean(prices))
    standard_error = (
        float(np.std(prices, ddof=1) / np.sqrt(prices.size))
        if prices.size > 1 else 0.0
    )
    LOGGER.info(
        'LSM price %.6f (se %.6f) in %.0f ms',
        price, standard_error, timings['total']
    )

    return PricingResult(
        engine='lsm',
        price=price,
        standard_error=standard_error,
        n_paths=config.n_paths,
        timings=timings,
        config={
            'spot': params.spot,
            'rate': params.rate,
            'vol': params.vol,
            'strike': params.strike,
            'maturity': params.maturity,
            'n_dates': schedule.count,
            'n_paths': config.n_paths,
            'basis': spec.functions,
            'seed': config.seed,
            'workers': config.workers,
            'lsm_parallel_paths': config.parallel_paths,
            'ridge': config.ridge,
            'ridge_mode': config.ridge_mode,
        },
        coefficients=CoefficientSet(alphas=alphas, fingerprint=spec.fingerprint),
    )


def coefficients_to_csv(coeffs, spec):
    """One row per exercise date: index, time and the fitted α."""
    names = [f'alpha_{i}' for i in range(spec.block_size)]
    lines = [','.join(['date_index', 'time'] + names)]
    for k, t in enumerate(spec.dates):
        alpha = coeffs.alphas[spec.block_of(k)]
        cells = [''] * spec.block_size if alpha is None else [
            format_number(float(a)) for a in alpha
        ]
        lines.append(','.join([str(k), format_number(t)] + cells))
    return '\n'.join(lines) + '\n'
