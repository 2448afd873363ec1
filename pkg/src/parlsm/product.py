# -*- encoding: utf-8

import abc

import attr
import numpy as np

from parlsm.errors import ConfigurationError


class Payoff(abc.ABC):
    """Something that pays a function of the spot when exercised."""

    @abc.abstractmethod
    def exercise_value(self, spot):
        """Cashflow from exercising at ``spot``.  Works on arrays too."""

    def in_the_money(self, spot):
        # At the money pays nothing, so it doesn't count as in the money.
        return self.exercise_value(spot) > 0


@attr.s(frozen=True)
class PutPayoff(Payoff):
    strike = attr.ib(converter=float)

    @strike.validator
    def _check_strike(self, attribute, value):
        if not value > 0:
            raise ConfigurationError('must be positive', key='strike')

    def exercise_value(self, spot):
        value = np.maximum(self.strike - np.asarray(spot, dtype=float), 0.0)
        if value.ndim == 0:
            return float(value)
        return value


def exercise_value(payoff, spot):
    return payoff.exercise_value(spot)


def in_the_money(payoff, spot):
    return payoff.in_the_money(spot)
