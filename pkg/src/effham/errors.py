class EffhamError(Exception):
    """Base class for package errors."""


class ConfigError(EffhamError, ValueError):
    """Invalid configuration or model parameters (CLI exit code 2)."""


class PreconditionError(EffhamError, ValueError):
    """An operation was called outside its domain."""


class NumericalError(EffhamError, RuntimeError):
    """Solver failure: stiffness, NaN, non-monotone predicate (CLI exit code 3)."""

    def __init__(self, msg, where=None):
        super().__init__(msg if where is None else f"{msg} (at {where})")
        self.where = where
