# -*- encoding: utf-8
"""Weights used by the iterative engine.

There are three of them:

*   ``weight_uv_step`` scales the accumulated normal equations before
    each iteration adds its contribution, so early iterations (priced
    with poor coefficients) fade out.
*   ``weight_price`` is the weight of an iteration's paths in the price.
*   ``boundary_weight`` is a regression weight that focuses on paths
    near the estimated exercise boundary.

"""

import math

import attr
import numpy as np

from parlsm import constants
from parlsm.errors import ConfigurationError


def weight_uv_step(i, lam, mu):
    """Returns 1 - λ·e^{-i/μ}."""
    return 1.0 - lam * math.exp(-i / mu)


def weight_price(i, nu):
    """Returns 1 - ½(1 - tanh(ν·(i - 1)))."""
    return 1.0 - 0.5 * (1.0 - math.tanh(nu * (i - 1)))


def boundary_weight(spot, boundary, beta):
    """Gaussian bump of width ``beta`` centred on the boundary.

    Works on arrays of spots; far tails underflow quietly to 0.

    """
    z = (np.asarray(spot, dtype=float) - boundary) / beta
    value = np.exp(-0.5 * z * z)
    if value.ndim == 0:
        return float(value)
    return value


def _finite(instance, attribute, value):
    if not math.isfinite(value):
        raise ConfigurationError('must be finite', key=attribute.name)


@attr.s(frozen=True)
class WeightScheme:
    lam = attr.ib(converter=float, default=constants.LAMBDA, validator=_finite)
    mu = attr.ib(converter=float, default=constants.MU, validator=_finite)
    nu = attr.ib(converter=float, default=constants.NU, validator=_finite)

    # Width of the boundary weight in price units; None means
    # ``BETA_FRACTION`` of the strike.
    beta = attr.ib(default=None)
    beta_shrink = attr.ib(
        converter=float, default=constants.BETA_SHRINK, validator=_finite
    )
    boundary_weights_enabled = attr.ib(converter=bool, default=True)

    @lam.validator
    def _check_lam(self, attribute, value):
        if value < 0:
            raise ConfigurationError('must be >= 0', key='lam')

    @mu.validator
    def _check_mu(self, attribute, value):
        if not value > 0:
            raise ConfigurationError('must be positive', key='mu')

    @nu.validator
    def _check_nu(self, attribute, value):
        if value < 0:
            raise ConfigurationError('must be >= 0', key='nu')

    @beta.validator
    def _check_beta(self, attribute, value):
        if value is None:
            return
        values = np.atleast_1d(np.asarray(value, dtype=float))
        if not np.all(np.isfinite(values)) or not np.all(values > 0):
            raise ConfigurationError('must be positive', key='beta')

    @beta_shrink.validator
    def _check_beta_shrink(self, attribute, value):
        if not 0 < value <= 1:
            raise ConfigurationError('must be in (0, 1]', key='beta_shrink')

    def validate(self, n_iterations):
        """Checks every U/V factor actually applied in ``n_iterations`` is >= 0.

        The first factor applied is the one for iteration 2; there is
        nothing to scale before iteration 1 adds its paths.

        """
        for i in range(2, n_iterations + 1):
            factor = weight_uv_step(i, self.lam, self.mu)
            if factor < 0:
                raise ConfigurationError(
                    f'U/V weight at iteration {i} is {factor:.4g} < 0 '
                    f'(lam={self.lam}, mu={self.mu})',
                    key='lam'
                )
        return self

    def uv_factor(self, i):
        return weight_uv_step(i, self.lam, self.mu)

    def price_weight(self, i):
        return weight_price(i, self.nu)

    def betas(self, strike, n_dates, i):
        """Boundary-weight widths for every date at iteration ``i``."""
        if self.beta is None:
            base = constants.BETA_FRACTION * strike
        else:
            base = np.asarray(self.beta, dtype=float)
            if base.ndim > 0 and base.shape != (n_dates,):
                raise ConfigurationError(
                    f'has {base.size} widths for {n_dates} exercise dates',
                    key='beta'
                )
        widths = np.broadcast_to(
            np.asarray(base, dtype=float), (n_dates,)
        ).copy()
        return widths * self.beta_shrink ** (i - 1)

    def effective_weights(self, n_iterations):
        """Weight of each iteration's U/V in the final normal equations.

        Iteration i ends up multiplied by every factor applied after it,
        w_i = Π_{j=i+1}^{n} w_UV(j).

        """
        weights = np.ones(n_iterations)
        for i in range(n_iterations - 1, 0, -1):
            weights[i - 1] = weights[i] * self.uv_factor(i + 1)
        return weights
