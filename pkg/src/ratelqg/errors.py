"""Exception hierarchy.

Every error carries an ``exit_code`` so the command line front end can map
failures onto process status without inspecting messages.
"""


class RateLqgError(Exception):
    exit_code = 1


class InvalidParameterError(RateLqgError, ValueError):
    exit_code = 1


class DimensionError(RateLqgError, ValueError):
    exit_code = 1


class InfeasibleError(RateLqgError):
    """Requested cost is at or below the full-information LQR cost."""

    exit_code = 2

    def __init__(self, message, threshold=None):
        super().__init__(message)
        self.threshold = threshold


class SynthesisError(RateLqgError):
    exit_code = 3


class SolverError(SynthesisError):
    def __init__(self, message, diagnostics=None):
        super().__init__(message)
        self.diagnostics = diagnostics or {}


class RunawayError(RateLqgError):
    exit_code = 3


class QuantizerOverflowError(RunawayError):
    pass


class PrecisionError(RateLqgError):
    exit_code = 3


class CorruptStreamError(RateLqgError):
    exit_code = 4


class CodecDesyncError(RateLqgError):
    exit_code = 4

    def __init__(self, message, step=None):
        super().__init__(message)
        self.step = step


class MeasurementIdentityError(RateLqgError):
    """Reconstructed measurement left the half-cell around ``C x``."""

    exit_code = 3

    def __init__(self, message, step=None):
        super().__init__(message)
        self.step = step
