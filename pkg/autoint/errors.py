"""
.. py:module:: errors
    :platform: Unix

Exceptions raised by AutoInt. All of them derive from :class:`AutoIntError`
and a matching builtin exception, so callers can catch either.
"""
__all__ = ['AutoIntError', 'InputArityError', 'ParameterError', 'BuildError',
           'DerivativeError', 'OracleError', 'NumericalAbort', 'ConfigError',
           'MissingArtifactError']


class AutoIntError(Exception):
    """Base class for errors raised by the library."""


class InputArityError(AutoIntError, ValueError):
    """Inputs given to a graph do not match its input signature."""


class ParameterError(AutoIntError, KeyError):
    """A parameter reference cannot be resolved or has a wrong shape."""

    def __str__(self):
        # KeyError quotes its argument, we want the plain message.
        return str(self.args[0]) if self.args else ''


class BuildError(AutoIntError, ValueError):
    """Network specification is invalid."""


class DerivativeError(AutoIntError, ValueError):
    """A node has no derivative rule for the requested order."""


class OracleError(AutoIntError, RuntimeError):
    """A numerical oracle did not converge."""


class NumericalAbort(AutoIntError, RuntimeError):
    """Training produced a non-finite loss or gradient.

    :ivar int iteration: iteration where the value became non-finite
    :ivar float lr: learning rate at that iteration
    :ivar str quantity: ``'loss'`` or ``'gradient'``
    """
    def __init__(self, iteration, lr, loss=float('nan'), quantity='loss'):
        super().__init__("Non-finite {} at iteration {} (loss={}, lr={:g})."
                         .format(quantity, iteration, loss, lr))
        self.quantity = quantity
        self.iteration = iteration
        self.lr = lr
        self.loss = loss


class ConfigError(AutoIntError, ValueError):
    """Experiment configuration is invalid."""


class MissingArtifactError(AutoIntError, FileNotFoundError):
    """A required artifact (e.g. a checkpoint) does not exist."""
