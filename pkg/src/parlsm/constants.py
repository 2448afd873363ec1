# -*- encoding: utf-8
"""Default experiment parameters.

These reproduce the standard American put setup: a put struck at 40 on a
share at 36, 6% rate, 20% volatility, one year, 50 exercise dates a year.

"""

import os


STRIKE = 40.0
SPOT = 36.0
RATE = 0.06
VOL = 0.2
MATURITY = 1.0
DATES_PER_YEAR = 50

N_PATHS = 100_000
N_ITERATIONS = 100
GROUP_SIZE = 10

LAMBDA = 2.0
MU = 2.0
NU = 0.99

# Width of the Gaussian boundary weight, as a fraction of the strike.
BETA_FRACTION = 0.2
BETA_SHRINK = 1.0

RIDGE = 1e-10
RIDGE_MODE = 'trace'

FD_TIME_STEPS = 40_000
FD_SPACE_STEPS = 1_000
FD_S_MAX_MULTIPLE = 4.0

DEFAULT_SEED = 20_130_101
SEED_ENV_VAR = 'AMC_SEED'


def seed_from_environment(environ=None):
    """Returns the seed in ``AMC_SEED``, or None if it isn't set."""
    environ = os.environ if environ is None else environ
    value = environ.get(SEED_ENV_VAR, '').strip()
    if not value:
        return None
    return int(value)
