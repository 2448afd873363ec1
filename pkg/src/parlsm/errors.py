# -*- encoding: utf-8


class AmcError(Exception):
    """Base class for every error raised by parlsm."""


class ConfigurationError(AmcError, ValueError):
    """A configuration value is missing, unknown, mistyped or out of range.

    :param key: Name of the offending key, if there is one.

    """
    def __init__(self, message, key=None):
        if key is not None:
            message = f'{key}: {message}'
        super().__init__(message)
        self.key = key


class DegenerateRegressionError(AmcError):
    """A block of the normal equations is numerically singular."""

    def __init__(self, block, date=None, detail=''):
        where = 'every block' if block is None else f'block {block}'
        if date is not None:
            where = f'date {date} ({where})'
        message = f'Degenerate regression at {where}'
        if detail:
            message = f'{message}: {detail}'
        super().__init__(message)
        self.block = block
        self.date = date
        self.detail = detail


class MissingCoefficientsError(AmcError):
    """Asked for a continuation value on a block without coefficients."""

    def __init__(self, block):
        super().__init__(
            f'No regression coefficients for block {block}; '
            f'use the bootstrap exercise policy instead'
        )
        self.block = block


class ConvergenceError(AmcError):
    """An iterative solver ran out of sweeps."""

    def __init__(self, step, sweeps):
        super().__init__(
            f'PSOR did not converge at time step {step} after {sweeps} sweeps'
        )
        self.step = step


class OutputError(AmcError):
    """A result artifact could not be written."""
