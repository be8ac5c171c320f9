"""Exception types shared across the simulator."""


class TelegateError(Exception):
    pass


class InvalidDimensionError(TelegateError):
    pass


class LayoutError(TelegateError):
    pass


class TruncationRiskError(TelegateError):
    """Raised when a displacement would push population into the truncated tail.

    Carries the smallest dimension considered safe for the request.
    """

    def __init__(self, message, recommended_dim):
        super().__init__(message)
        self.recommended_dim = recommended_dim


class InconsistentCoherenceError(TelegateError):
    pass


class ZeroStateError(TelegateError):
    pass


class AdiabaticityError(TelegateError):
    pass


class StepSizeError(TelegateError):
    pass


class DivergenceError(TelegateError):
    def __init__(self, message, iteration=None):
        super().__init__(message)
        self.iteration = iteration


class CoolingTimeoutError(TelegateError):
    pass


class ConfigError(TelegateError):
    pass
