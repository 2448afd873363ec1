# -*- encoding: utf-8
"""Least-squares regression of continuation values.

Exercise dates are split into contiguous groups ("blocks") of
``group_size`` dates.  Each block has its own basis functions, so the
normal-equation matrix is block-diagonal and every block is solved on its
own.  With time in the basis, a block uses

    1, S, S², t, t·S, t·S²

and with ``group_size=1`` and the spot-only basis this is the classic
date-by-date regression on 1, S, S².

"""

import bisect
import hashlib
import json
import logging

import attr
import numpy as np
from scipy.linalg import LinAlgError, cho_factor, cho_solve

from parlsm.constants import RIDGE, RIDGE_MODE
from parlsm.errors import (
    ConfigurationError, DegenerateRegressionError, MissingCoefficientsError
)


LOGGER = logging.getLogger(__name__)

BASIS_FUNCTIONS = {
    'time': ('1', 'S', 'S^2', 't', 'tS', 'tS^2'),
    'spot': ('1', 'S', 'S^2'),
}

RIDGE_MODES = ('trace', 'column')

# Smallest share of a column's weight left after eliminating the columns
# before it.  Anything below this is numerically rank-deficient.
_PIVOT_TOLERANCE = 1e-13

_DATE_TOLERANCE = 1e-12


def _to_dates(values):
    return tuple(float(v) for v in values)


@attr.s(frozen=True)
class BasisSpec:
    dates = attr.ib(converter=_to_dates)
    group_size = attr.ib(converter=int)
    functions = attr.ib(default='time')

    @group_size.validator
    def _check_group_size(self, attribute, value):
        if value < 1:
            raise ConfigurationError('must be at least 1', key='group_size')

    @functions.validator
    def _check_functions(self, attribute, value):
        if value not in BASIS_FUNCTIONS:
            raise ConfigurationError(
                f'must be one of {sorted(BASIS_FUNCTIONS)}, got {value!r}',
                key='basis'
            )

    @classmethod
    def for_schedule(cls, schedule, group_size, functions='time'):
        return cls(
            dates=schedule.dates, group_size=group_size, functions=functions
        )

    @property
    def with_time(self):
        return self.functions == 'time'

    @property
    def block_size(self):
        return len(BASIS_FUNCTIONS[self.functions])

    @property
    def n_dates(self):
        return len(self.dates)

    @property
    def n_blocks(self):
        return -(-self.n_dates // self.group_size)

    @property
    def dimension(self):
        return self.n_blocks * self.block_size

    def block_of(self, date_index):
        if not 0 <= date_index < self.n_dates:
            raise IndexError(f'No exercise date with index {date_index}')
        return date_index // self.group_size

    def block_dates(self, block):
        start = block * self.group_size
        return range(start, min(start + self.group_size, self.n_dates))

    def date_blocks(self):
        """Block index of every date, as an integer array."""
        return np.arange(self.n_dates) // self.group_size

    def date_index(self, time):
        """Index of the exercise date at ``time``."""
        i = bisect.bisect_left(self.dates, time - _DATE_TOLERANCE)
        if i < self.n_dates and abs(self.dates[i] - time) <= _DATE_TOLERANCE:
            return i
        raise ValueError(f'{time} is not an exercise date')

    @property
    def fingerprint(self):
        h = hashlib.md5()
        h.update(json.dumps({
            'functions': self.functions,
            'group_size': self.group_size,
            'dates': [round(t, 12) for t in self.dates],
        }, sort_keys=True).encode('utf8'))
        return h.hexdigest()[:12]

    def features(self, spots, time):
        """Basis values at every spot in ``spots``, as an ``(n, p_b)`` array."""
        spots = np.atleast_1d(np.asarray(spots, dtype=float))
        columns = [np.ones_like(spots), spots, spots * spots]
        if self.with_time:
            columns += [time * c for c in columns]
        return np.column_stack(columns)


def basis_eval(spec, block, spot, time):
    date = spec.date_index(time)
    if spec.block_of(date) != block:
        raise ValueError(
            f'Time {time} belongs to block {spec.block_of(date)}, not {block}'
        )
    return spec.features(spot, time)[0]


@attr.s(eq=False)
class NormalEquations:
    """Per-block matrices U_b and vectors V_b.

    The arrays have shapes ``(B, p_b, p_b)`` and ``(B, p_b)``.  Every
    method updates in place and returns ``self``.

    """
    spec = attr.ib()
    matrices = attr.ib()
    vectors = attr.ib()

    @classmethod
    def zeros(cls, spec):
        p = spec.block_size
        return cls(
            spec=spec,
            matrices=np.zeros((spec.n_blocks, p, p)),
            vectors=np.zeros((spec.n_blocks, p)),
        )

    def copy(self):
        return NormalEquations(
            spec=self.spec,
            matrices=self.matrices.copy(),
            vectors=self.vectors.copy()
        )

    def _check_features(self, f):
        if f.shape[-1] != self.spec.block_size:
            raise ValueError(
                f'Expected {self.spec.block_size} basis values, got {f.shape[-1]}'
            )

    def accumulate(self, block, weight, f, discounted_payoff):
        """U_b += w·f·fᵀ and V_b += w·f·P̃ for a single observation."""
        if weight < 0:
            raise ValueError(f'Regression weights must be >= 0; got {weight}')
        f = np.asarray(f, dtype=float)
        self._check_features(f)
        if weight == 0:
            return self
        self.matrices[block] += weight * np.outer(f, f)
        self.vectors[block] += weight * f * discounted_payoff
        return self

    def accumulate_batch(self, block, weights, features, targets):
        weights = np.asarray(weights, dtype=float)
        if np.any(weights < 0):
            raise ValueError('Regression weights must be >= 0')
        self._check_features(features)
        weighted = features * weights[:, None]
        self.matrices[block] += weighted.T @ features
        self.vectors[block] += weighted.T @ targets
        return self

    def scale(self, factor):
        self.matrices *= factor
        self.vectors *= factor
        return self

    def merge(self, other):
        if other.spec != self.spec:
            raise ValueError('Cannot merge normal equations for different bases')
        self.matrices += other.matrices
        self.vectors += other.vectors
        return self

    def is_empty(self, block):
        return not np.any(self.matrices[block])

    def to_json(self, coefficients=None):
        """Dump every block for inspection."""
        blocks = []
        for b in range(self.spec.n_blocks):
            entry = {
                'block': b,
                'matrix': self.matrices[b].tolist(),
                'vector': self.vectors[b].tolist(),
            }
            if coefficients is not None:
                alpha = coefficients.alphas[b]
                entry['alpha'] = None if alpha is None else alpha.tolist()
            blocks.append(entry)
        return json.dumps(blocks, indent=2)


def _to_alphas(values):
    return tuple(
        None if a is None else np.asarray(a, dtype=float) for a in values
    )


@attr.s(frozen=True, eq=False)
class CoefficientSet:
    """Regression coefficients α_b for each block, or None if unknown."""
    alphas = attr.ib(converter=_to_alphas)
    fingerprint = attr.ib(default=None)

    @classmethod
    def bootstrap(cls, spec):
        return cls(alphas=[None] * spec.n_blocks, fingerprint=spec.fingerprint)

    @property
    def is_bootstrap(self):
        return all(a is None for a in self.alphas)

    def for_block(self, block):
        alpha = self.alphas[block]
        if alpha is None:
            raise MissingCoefficientsError(block)
        return alpha

    def as_arrays(self, block_size):
        """Dense ``(B, p_b)`` coefficients plus a mask of known blocks."""
        dense = np.zeros((len(self.alphas), block_size))
        known = np.zeros(len(self.alphas), dtype=np.bool_)
        for b, alpha in enumerate(self.alphas):
            if alpha is not None:
                dense[b] = alpha
                known[b] = True
        return dense, known

    def to_json(self):
        return json.dumps({
            'fingerprint': self.fingerprint,
            'blocks': [None if a is None else a.tolist() for a in self.alphas],
        }, separators=(',', ':'), sort_keys=True)

    @classmethod
    def from_json(cls, text, spec):
        """Loads coefficients, refusing any saved for a different basis."""
        data = json.loads(text)
        if data.get('fingerprint') != spec.fingerprint:
            raise ConfigurationError(
                f'coefficients were fitted for basis {data.get("fingerprint")}, '
                f'not {spec.fingerprint}',
                key='warm_start_file'
            )
        blocks = data['blocks']
        if len(blocks) != spec.n_blocks or any(
            b is not None and len(b) != spec.block_size for b in blocks
        ):
            raise ConfigurationError(
                'coefficient dimensions do not match the basis',
                key='warm_start_file'
            )
        return cls(alphas=blocks, fingerprint=spec.fingerprint)


def ridge_shift(matrix, ridge, mode=RIDGE_MODE):
    """Diagonal added to a block before it is factored.

    ``trace`` adds ridge·tr(U)/p to every diagonal entry.  ``column``
    adds ``ridge`` times each column's own diagonal entry, which leaves
    the fit unchanged if the basis is rescaled.

    """
    if mode not in RIDGE_MODES:
        raise ConfigurationError(
            f'must be one of {", ".join(RIDGE_MODES)}; got {mode!r}', key='ridge_mode'
        )
    if mode == 'trace':
        mean_diagonal = np.trace(matrix) / matrix.shape[0]
        if not mean_diagonal > 0:
            mean_diagonal = 1.0
        return np.full(matrix.shape[0], ridge * mean_diagonal)
    diagonal = np.diag(matrix).copy()
    diagonal[diagonal <= 0] = 1.0
    return ridge * diagonal


def _solve_block(matrix, vector, ridge, block, mode=RIDGE_MODE):
    system = matrix + np.diag(ridge_shift(matrix, ridge, mode))
    try:
        factor, lower = cho_factor(system, lower=True)
    except (LinAlgError, ValueError) as err:
        raise DegenerateRegressionError(block, detail=str(err)) from err

    pivots = np.diag(factor) ** 2 / np.diag(system)
    if not np.all(pivots >= _PIVOT_TOLERANCE):
        raise DegenerateRegressionError(
            block, detail=f'smallest pivot share {np.min(pivots):.3g}'
        )
    return cho_solve((factor, lower), vector)


def solve_coefficients(ne, ridge=RIDGE, blocks=None, executor=None,
                       ridge_mode=RIDGE_MODE):
    """Solves (U_b + ridge·tr(U_b)/p·I)·α_b = V_b for every block with
    any observations.  Blocks without observations get no coefficients.

    :param ridge_mode: ``'trace'`` as above, or ``'column'`` to scale
        the ridge by each column's own diagonal entry instead.
    :param blocks: Only solve these blocks (the others stay None).
    :param executor: Optional ``concurrent.futures`` executor; blocks
        are independent and can be solved concurrently.

    """
    spec = ne.spec
    if blocks is None:
        blocks = range(spec.n_blocks)
    todo = [b for b in blocks if not ne.is_empty(b)]

    def _solve(b):
        return _solve_block(ne.matrices[b], ne.vectors[b], ridge, b, ridge_mode)

    if executor is None:
        solved = [_solve(b) for b in todo]
    else:
        solved = list(executor.map(_solve, todo))

    alphas = [None] * spec.n_blocks
    for b, alpha in zip(todo, solved):
        alphas[b] = alpha
    return CoefficientSet(alphas=alphas, fingerprint=spec.fingerprint)


def continuation_value(coeffs, spec, spot, time):
    """α_bᵀ·f(S, t) for the block containing ``time``."""
    block = spec.block_of(spec.date_index(time))
    value = spec.features(spot, time) @ coeffs.for_block(block)
    if np.ndim(spot) == 0:
        return float(value[0])
    return value
