# -*- encoding: utf-8
"""Convergence studies: price along one axis, then fit the rate.

A study varies one setting (paths, iterations, workers or date-group
size), prices every point several times with seeds ``seed + repeat``,
and records the price, the engine's own standard error and the wall
time.  ``estimate_rate`` fits a straight line to log(s.e.) against
log(axis value).

"""

import csv
import io
import logging

import attr
import numpy as np
from scipy.stats import linregress

from parlsm import constants
from parlsm.errors import ConfigurationError
from parlsm.lsm import LsmConfig, price_lsm
from parlsm.market import ExerciseSchedule, MarketParams
from parlsm.parallel import IterationPlan, price_parallel
from parlsm.regression import BasisSpec
from parlsm.results import format_number
from parlsm.weights import WeightScheme


LOGGER = logging.getLogger(__name__)

AXES = {
    'paths': 'n_paths',
    'iterations': 'n_iterations',
    'workers': 'workers',
    'group_size': 'group_size',
}

STUDY_COLUMNS = ('axis_value', 'repeat', 'price', 'se_internal', 'wall_ms')
TRACE_COLUMNS = ('axis_value', 'repeat', 'iteration', 'price', 'standard_error')

ENGINES = ('parallel', 'lsm')


@attr.s(frozen=True)
class EngineSetup:
    """Everything needed to price one Monte Carlo run, bar the seed."""
    params = attr.ib(factory=lambda: MarketParams(
        spot=constants.SPOT,
        rate=constants.RATE,
        vol=constants.VOL,
        strike=constants.STRIKE,
        maturity=constants.MATURITY,
    ))
    engine = attr.ib(default='parallel')
    dates_per_year = attr.ib(converter=int, default=constants.DATES_PER_YEAR)
    n_paths = attr.ib(converter=int, default=constants.N_PATHS)
    n_iterations = attr.ib(converter=int, default=constants.N_ITERATIONS)
    group_size = attr.ib(converter=int, default=constants.GROUP_SIZE)
    basis = attr.ib(default='time')
    weights = attr.ib(factory=WeightScheme)
    seed = attr.ib(converter=int, default=constants.DEFAULT_SEED)
    workers = attr.ib(converter=int, default=1)
    ridge = attr.ib(converter=float, default=constants.RIDGE)
    ridge_mode = attr.ib(default=constants.RIDGE_MODE)
    bootstrap = attr.ib(default='european')
    lsm_parallel_paths = attr.ib(converter=bool, default=False)

    @engine.validator
    def _check_engine(self, attribute, value):
        if value not in ENGINES:
            raise ConfigurationError(
                f'must be one of {ENGINES}, got {value!r}', key='engine'
            )

    def schedule(self):
        return ExerciseSchedule.uniform(self.params.maturity, self.dates_per_year)

    def basis_spec(self, schedule=None):
        return BasisSpec.for_schedule(
            schedule or self.schedule(),
            group_size=self.group_size,
            functions=self.basis
        )

    def with_axis(self, axis, value):
        if axis not in AXES:
            raise ConfigurationError(
                f'must be one of {sorted(AXES)}, got {axis!r}', key='study_axis'
            )
        return attr.evolve(self, **{AXES[axis]: value})

    def price(self, seed=None):
        seed = self.seed if seed is None else seed
        schedule = self.schedule()
        if self.engine == 'lsm':
            return price_lsm(self.params, schedule, LsmConfig(
                n_paths=self.n_paths,
                seed=seed,
                parallel_paths=self.lsm_parallel_paths,
                workers=self.workers,
                ridge=self.ridge,
                ridge_mode=self.ridge_mode,
            ))
        return price_parallel(
            self.params,
            schedule,
            IterationPlan.from_total(self.n_paths, self.n_iterations),
            weights=self.weights,
            spec=self.basis_spec(schedule),
            seed=seed,
            bootstrap=self.bootstrap,
            workers=self.workers,
            ridge=self.ridge,
            ridge_mode=self.ridge_mode,
        )


@attr.s(frozen=True)
class StudyRecord:
    axis_value = attr.ib(converter=int)
    repeat = attr.ib(converter=int)
    price = attr.ib(converter=float)
    se_internal = attr.ib(converter=float)
    wall_ms = attr.ib(converter=float)

    # Running-price trace of the run, for the iterative engine.
    trace = attr.ib(default=None, eq=False, repr=False)


@attr.s(frozen=True)
class PointSummary:
    axis_value = attr.ib()
    mean_price = attr.ib()

    # Spread of the repeats' prices divided by √repeats, and the mean of
    # the engine's own estimate, which it should roughly agree with.
    se_empirical = attr.ib()
    se_internal = attr.ib()
    wall_ms = attr.ib()


@attr.s(frozen=True)
class ConvergenceStudy:
    axis = attr.ib()
    points = attr.ib(converter=lambda values: tuple(int(v) for v in values))
    repeats = attr.ib(converter=int, default=5)
    records = attr.ib(converter=tuple, default=())

    @axis.validator
    def _check_axis(self, attribute, value):
        if value not in AXES:
            raise ConfigurationError(
                f'must be one of {sorted(AXES)}, got {value!r}', key='study_axis'
            )

    @points.validator
    def _check_points(self, attribute, value):
        if len(set(value)) < 3:
            raise ConfigurationError(
                'need at least 3 distinct points', key='study_points'
            )
        if any(v < 1 for v in value):
            raise ConfigurationError('must all be positive', key='study_points')

    @repeats.validator
    def _check_repeats(self, attribute, value):
        if value < 1:
            raise ConfigurationError('must be at least 1', key='study_repeats')

    @property
    def is_filled(self):
        return len(self.records) == len(self.points) * self.repeats

    def summaries(self):
        summaries = []
        for point in self.points:
            rows = [r for r in self.records if r.axis_value == point]
            if not rows:
                continue
            prices = np.array([r.price for r in rows])
            spread = np.std(prices, ddof=1) if len(rows) > 1 else 0.0
            summaries.append(PointSummary(
                axis_value=point,
                mean_price=float(np.mean(prices)),
                se_empirical=float(spread / np.sqrt(len(rows))),
                se_internal=float(np.mean([r.se_internal for r in rows])),
                wall_ms=float(np.mean([r.wall_ms for r in rows])),
            ))
        return summaries


@attr.s(frozen=True)
class RateEstimate:
    slope = attr.ib()
    slope_stderr = attr.ib()
    intercept = attr.ib(default=0.0)
    n_points = attr.ib(default=0)


def run_convergence_study(study, setup):
    """Prices every (point, repeat) pair in order and returns a filled study."""
    LOGGER.info(
        'Convergence study over %s: %s, %d repeats',
        study.axis, study.points, study.repeats
    )
    records = []
    for point in study.points:
        engine = setup.with_axis(study.axis, point)
        for repeat in range(study.repeats):
            result = engine.price(seed=setup.seed + repeat)
            records.append(StudyRecord(
                axis_value=point,
                repeat=repeat,
                price=result.price,
                se_internal=result.standard_error,
                wall_ms=result.wall_ms,
                trace=result.iteration_trace,
            ))
            LOGGER.debug(
                '%s=%d repeat %d: %.6f (se %.6f)',
                study.axis, point, repeat, result.price, result.standard_error
            )
    return attr.evolve(study, records=records)


def estimate_rate(study, column='se_internal'):
    """Least-squares slope of log(column) against log(axis value).

    By default each point contributes the engine's own standard error,
    averaged over its repeats, so a study with a single repeat can still
    be fitted.  ``column='se_empirical'`` fits the spread of the repeats'
    prices divided by √repeats instead (see ``ConvergenceStudy.summaries``);
    that needs at least two repeats per point.  Any other column of
    ``StudyRecord`` (e.g. ``wall_ms``) is averaged over the repeats.

    """
    xs, ys = [], []
    if column == 'se_empirical':
        for summary in sorted(study.summaries(), key=lambda s: s.axis_value):
            xs.append(summary.axis_value)
            ys.append(summary.se_empirical)
    else:
        for point in sorted(set(study.points)):
            values = [getattr(r, column) for r in study.records if r.axis_value == point]
            if values:
                xs.append(point)
                ys.append(np.mean(values))
    if len(xs) < 3:
        raise ValueError(f'Need at least 3 filled points to fit a rate, got {len(xs)}')
    if min(ys) <= 0:
        raise ValueError(f'Cannot take the log of non-positive {column} values')

    fit = linregress(np.log(xs), np.log(ys))
    return RateEstimate(
        slope=float(fit.slope),
        slope_stderr=float(fit.stderr),
        intercept=float(fit.intercept),
        n_points=len(xs),
    )


def study_to_csv(study):
    buf = io.StringIO()
    writer = csv.writer(buf, lineterminator='\n')
    writer.writerow(STUDY_COLUMNS)
    for r in study.records:
        writer.writerow([
            r.axis_value, r.repeat,
            format_number(r.price), format_number(r.se_internal),
            format_number(r.wall_ms),
        ])
    return buf.getvalue()


def study_from_csv(text, axis, repeats=None):
    """Reads a study written by ``study_to_csv``."""
    records = [
        StudyRecord(
            axis_value=int(row['axis_value']),
            repeat=int(row['repeat']),
            price=float(row['price']),
            se_internal=float(row['se_internal']),
            wall_ms=float(row['wall_ms']),
        )
        for row in csv.DictReader(io.StringIO(text))
    ]
    points = list(dict.fromkeys(r.axis_value for r in records))
    if repeats is None:
        repeats = max(r.repeat for r in records) + 1
    return ConvergenceStudy(
        axis=axis, points=points, repeats=repeats, records=records
    )


def traces_to_csv(study):
    buf = io.StringIO()
    writer = csv.writer(buf, lineterminator='\n')
    writer.writerow(TRACE_COLUMNS)
    for r in study.records:
        for row in r.trace or ():
            writer.writerow([
                r.axis_value, r.repeat, row.iteration,
                format_number(row.price), format_number(row.standard_error),
            ])
    return buf.getvalue()
