"""Exception hierarchy shared by all modules."""


class EntransferError(Exception):
    """Base class for every error raised by this package."""


class StateError(EntransferError, ValueError):
    """A state or operator violates its structural invariants."""


class DimensionError(EntransferError, ValueError):
    """Operands live on incompatible Hilbert spaces, or an index is invalid."""


class TruncationError(EntransferError, ValueError):
    """The Fock cutoff discards more probability than allowed.

    Attributes
    ----------
    weight : float
        Squared norm retained by the truncated state.
    required : float
        Minimum weight that was asked for.
    """

    def __init__(self, message, weight, required):
        super().__init__(message)
        self.weight = weight
        self.required = required


class LeakageError(EntransferError, RuntimeError):
    """Population reached a truncation-boundary state that is frozen."""


class ConfigError(EntransferError, ValueError):
    """An experiment configuration is invalid.

    ``field`` names the offending key when there is one.
    """

    def __init__(self, message, field=None):
        super().__init__(message if field is None else f"{field}: {message}")
        self.field = field


class ConvergenceError(EntransferError, RuntimeError):
    """Truncation scan hit its cap before results settled."""
