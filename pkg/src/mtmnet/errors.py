"""Exception types raised across the simulator."""


class ConfigurationError(ValueError):
    """Invalid scenario, radio or schedule configuration."""


class ParameterError(ValueError):
    """A call argument is outside the configured domain (unknown power level, missing rate...)."""


class UnknownNodeError(LookupError):
    pass


class ProtocolError(RuntimeError):
    """A protocol step was invoked in a state where it is not allowed."""


class DivergenceError(RuntimeError):
    """The scheduler hit its round limit without reaching a termination rule.

    The partial trace is attached so the caller can inspect what happened.
    """

    def __init__(self, message, trace):
        super().__init__(message)
        self.trace = trace


class UnroutableError(ValueError):
    """Positive demand offered with no route to carry it."""


class SummaryError(ValueError):
    pass
