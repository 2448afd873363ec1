# -*- encoding: utf-8
"""Run configuration.

Settings come from four places, each overriding the one before:

1.  the defaults in ``parlsm.constants``
2.  a flat YAML config file (``key: value`` per line)
3.  the ``AMC_SEED`` environment variable
4.  ``--key=value`` flags on the command line

Every problem is reported as a ``ConfigurationError`` naming the key.

"""

import math

import attr
import yaml

from parlsm import constants
from parlsm.diagnostics import EngineSetup
from parlsm.errors import ConfigurationError
from parlsm.market import ExerciseSchedule, MarketParams
from parlsm.oracle import FD_METHODS, FdGrid
from parlsm.regression import BASIS_FUNCTIONS, RIDGE_MODES
from parlsm.results import FORMATS
from parlsm.weights import WeightScheme


COMMANDS = (
    'price-parallel', 'price-lsm', 'price-fd', 'price-european', 'table', 'converge'
)
BOOTSTRAPS = ('european', 'warm_start')
STUDY_AXES = ('paths', 'iterations', 'workers', 'group_size')

_TRUE = ('true', 'yes', 'on', '1')
_FALSE = ('false', 'no', 'off', '0')


def _at_least(minimum):
    def _validator(instance, attribute, value):
        if value < minimum:
            raise ConfigurationError(f'must be at least {minimum}', key=attribute.name)
    return _validator


def _positive(instance, attribute, value):
    if value is not None and not (math.isfinite(value) and value > 0):
        raise ConfigurationError('must be positive', key=attribute.name)


def _finite(instance, attribute, value):
    if not math.isfinite(value):
        raise ConfigurationError('must be finite', key=attribute.name)


def _one_of(options):
    def _validator(instance, attribute, value):
        if value not in options:
            raise ConfigurationError(
                f'must be one of {", ".join(options)}; got {value!r}',
                key=attribute.name
            )
    return _validator


@attr.s(frozen=True)
class RunConfig:
    command = attr.ib(default='price-parallel', validator=_one_of(COMMANDS))

    spot = attr.ib(default=constants.SPOT, validator=_positive)
    rate = attr.ib(default=constants.RATE, validator=_finite)
    vol = attr.ib(default=constants.VOL)
    strike = attr.ib(default=constants.STRIKE, validator=_positive)
    maturity = attr.ib(default=constants.MATURITY, validator=_positive)
    dates_per_year = attr.ib(default=constants.DATES_PER_YEAR, validator=_at_least(1))

    n_paths = attr.ib(default=constants.N_PATHS, validator=_at_least(1))
    n_iterations = attr.ib(default=constants.N_ITERATIONS, validator=_at_least(1))
    group_size = attr.ib(default=constants.GROUP_SIZE, validator=_at_least(1))
    basis = attr.ib(default='time', validator=_one_of(tuple(BASIS_FUNCTIONS)))

    lam = attr.ib(default=constants.LAMBDA)
    mu = attr.ib(default=constants.MU)
    nu = attr.ib(default=constants.NU)
    beta = attr.ib(default=None, validator=_positive)
    beta_shrink = attr.ib(default=constants.BETA_SHRINK)
    boundary_weights = attr.ib(default=True)

    seed = attr.ib(default=constants.DEFAULT_SEED, validator=_at_least(0))
    workers = attr.ib(default=1, validator=_at_least(1))
    bootstrap = attr.ib(default='european', validator=_one_of(BOOTSTRAPS))
    warm_start_file = attr.ib(default=None)
    ridge = attr.ib(default=constants.RIDGE, validator=_at_least(0))
    ridge_mode = attr.ib(default=constants.RIDGE_MODE, validator=_one_of(RIDGE_MODES))
    lsm_parallel_paths = attr.ib(default=False)

    fd_time_steps = attr.ib(default=constants.FD_TIME_STEPS, validator=_at_least(1))
    fd_space_steps = attr.ib(default=constants.FD_SPACE_STEPS, validator=_at_least(3))
    fd_s_max = attr.ib(default=None, validator=_positive)
    fd_method = attr.ib(default='projection', validator=_one_of(FD_METHODS))

    output_dir = attr.ib(default='.')
    format = attr.ib(default='json', validator=_one_of(FORMATS))

    study_axis = attr.ib(default='paths', validator=_one_of(STUDY_AXES))
    study_points = attr.ib(default=(10_000, 40_000, 160_000), converter=tuple)
    study_repeats = attr.ib(default=5, validator=_at_least(1))

    @vol.validator
    def _check_vol(self, attribute, value):
        if not (math.isfinite(value) and value >= 0):
            raise ConfigurationError('must be non-negative', key='vol')

    @study_points.validator
    def _check_study_points(self, attribute, value):
        if len(set(value)) < 3:
            raise ConfigurationError('need at least 3 distinct points', key='study_points')

    def __attrs_post_init__(self):
        if self.bootstrap == 'warm_start' and not self.warm_start_file:
            raise ConfigurationError(
                'is required when bootstrap is warm_start', key='warm_start_file'
            )
        if self.fd_s_max is not None and not self.fd_s_max > self.strike:
            raise ConfigurationError('must be above the strike', key='fd_s_max')

        # These build their own validated objects; do it now so a bad
        # value is reported before any computation starts.
        if self.seed >= 2 ** 64:
            raise ConfigurationError('must fit in 64 bits', key='seed')
        self.weight_scheme().validate(self.n_iterations)
        uses_iterations = self.command in ('price-parallel', 'table', 'converge')
        if uses_iterations and self.n_paths % self.n_iterations:
            raise ConfigurationError(
                f'must be a multiple of n_iterations ({self.n_iterations})',
                key='n_paths'
            )

    def market_params(self):
        return MarketParams(
            spot=self.spot,
            rate=self.rate,
            vol=self.vol,
            strike=self.strike,
            maturity=self.maturity
        )

    def schedule(self):
        return ExerciseSchedule.uniform(self.maturity, self.dates_per_year)

    def weight_scheme(self):
        return WeightScheme(
            lam=self.lam,
            mu=self.mu,
            nu=self.nu,
            beta=self.beta,
            beta_shrink=self.beta_shrink,
            boundary_weights_enabled=self.boundary_weights,
        )

    def fd_grid(self):
        return FdGrid(
            n_time_steps=self.fd_time_steps,
            n_space_steps=self.fd_space_steps,
            s_max=self.fd_s_max,
            method=self.fd_method,
        )

    def setup(self, engine='parallel', bootstrap='european'):
        return EngineSetup(
            params=self.market_params(),
            engine=engine,
            dates_per_year=self.dates_per_year,
            n_paths=self.n_paths,
            n_iterations=self.n_iterations,
            group_size=self.group_size,
            basis=self.basis,
            weights=self.weight_scheme(),
            seed=self.seed,
            workers=self.workers,
            ridge=self.ridge,
            ridge_mode=self.ridge_mode,
            bootstrap=bootstrap,
            lsm_parallel_paths=self.lsm_parallel_paths,
        )

    def to_dict(self):
        return attr.asdict(self)


# Type of every key, used to check file values and to parse flags.
KEY_TYPES = {
    'command': str,
    'spot': float, 'rate': float, 'vol': float, 'strike': float,
    'maturity': float, 'dates_per_year': int,
    'n_paths': int, 'n_iterations': int, 'group_size': int, 'basis': str,
    'lam': float, 'mu': float, 'nu': float, 'beta': float,
    'beta_shrink': float, 'boundary_weights': bool,
    'seed': int, 'workers': int, 'bootstrap': str, 'warm_start_file': str,
    'ridge': float, 'ridge_mode': str, 'lsm_parallel_paths': bool,
    'fd_time_steps': int, 'fd_space_steps': int, 'fd_s_max': float,
    'fd_method': str,
    'output_dir': str, 'format': str,
    'study_axis': str, 'study_points': list, 'study_repeats': int,
}

# Keys that may be left empty.
OPTIONAL_KEYS = {'beta', 'fd_s_max', 'warm_start_file'}


def _check_value(key, value):
    """Coerces an already-typed value (e.g. from YAML) to the key's type."""
    kind = KEY_TYPES[key]
    if value is None:
        if key in OPTIONAL_KEYS:
            return None
        raise ConfigurationError('may not be empty', key=key)

    if kind is bool:
        if isinstance(value, bool):
            return value
    elif kind is int:
        if isinstance(value, int) and not isinstance(value, bool):
            return value
        if isinstance(value, float) and value.is_integer():
            return int(value)
    elif kind is float:
        if isinstance(value, (int, float)) and not isinstance(value, bool):
            return float(value)
    elif kind is str:
        if isinstance(value, str):
            return value
    elif kind is list:
        if isinstance(value, (list, tuple)):
            return tuple(_check_value_item(key, v) for v in value)

    raise ConfigurationError(
        f'expected {kind.__name__}, got {type(value).__name__} {value!r}', key=key
    )


def _check_value_item(key, value):
    if isinstance(value, int) and not isinstance(value, bool):
        return value
    raise ConfigurationError(f'expected a list of integers, got {value!r}', key=key)


def parse_flag(key, text):
    """Parses the text of a ``--key=value`` flag into the key's type."""
    key = key.lstrip('-').replace('-', '_')
    if key not in KEY_TYPES:
        raise ConfigurationError('unknown key', key=key)
    kind = KEY_TYPES[key]
    text = text.strip()

    if text == '' and key in OPTIONAL_KEYS:
        return key, None
    try:
        if kind is bool:
            if text.lower() in _TRUE:
                return key, True
            if text.lower() in _FALSE:
                return key, False
            raise ValueError(text)
        if kind is int:
            return key, int(float(text)) if 'e' in text.lower() else int(text)
        if kind is float:
            return key, float(text)
        if kind is list:
            return key, tuple(int(v) for v in text.split(',') if v.strip())
    except ValueError:
        raise ConfigurationError(
            f'expected {kind.__name__}, got {text!r}', key=key
        ) from None
    return key, text


def load_config_file(path):
    """Reads a flat YAML mapping of config keys."""
    try:
        with open(path) as infile:
            data = yaml.safe_load(infile)
    except OSError as err:
        raise ConfigurationError(f'unable to read {path}: {err}', key='config') from err
    except yaml.YAMLError as err:
        raise ConfigurationError(f'{path} is not valid YAML: {err}', key='config') from err

    if data is None:
        return {}
    if not isinstance(data, dict):
        raise ConfigurationError(f'{path} must contain a mapping', key='config')

    values = {}
    for key, value in data.items():
        key = str(key).replace('-', '_')
        if key not in KEY_TYPES:
            raise ConfigurationError('unknown key', key=key)
        if isinstance(value, dict):
            raise ConfigurationError('nested settings are not supported', key=key)
        values[key] = _check_value(key, value)
    return values


def parse_config(path=None, flags=None, environ=None):
    """Builds a RunConfig from a config file, the environment and flags.

    :param path: Optional YAML config file.
    :param flags: Mapping of key (``--n-paths`` or ``n_paths``) to the
        flag's text; None values are ignored.
    :param environ: Environment to read ``AMC_SEED`` from; defaults to
        ``os.environ``.

    """
    values = load_config_file(path) if path else {}

    try:
        seed = constants.seed_from_environment(environ)
    except ValueError as err:
        raise ConfigurationError(
            f'{constants.SEED_ENV_VAR} is not an integer: {err}', key='seed'
        ) from None
    if seed is not None:
        values['seed'] = seed

    for name, text in (flags or {}).items():
        if text is None:
            continue
        key, value = parse_flag(name, str(text))
        values[key] = value

    return RunConfig(**values)
