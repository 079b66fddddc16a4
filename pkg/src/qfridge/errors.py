"""Exception hierarchy used across the package."""


class QFridgeError(Exception):
    """Base class for all package errors."""

    #: short machine-readable tag, emitted in CLI error records
    code = "error"


class DimensionError(QFridgeError, ValueError):
    code = "dimension_mismatch"


class ResonanceError(QFridgeError, ValueError):
    code = "resonance_violation"


class ParameterError(QFridgeError, ValueError):
    code = "invalid_parameter"


class BathSpecError(QFridgeError, ValueError):
    code = "invalid_bath"


class InvalidStateError(QFridgeError, ValueError):
    code = "invalid_state"


class DegenerateSteadyStateError(QFridgeError, RuntimeError):
    code = "degenerate_fixed_point"


class ConvergenceError(QFridgeError, RuntimeError):
    code = "convergence"


class IntegrationError(QFridgeError, RuntimeError):
    code = "integration"


class UndefinedTemperatureError(QFridgeError, ValueError):
    code = "undefined_temperature"


class NotCoolingError(QFridgeError, ValueError):
    code = "not_cooling"


class InfiniteVirtualTemperatureError(QFridgeError, ZeroDivisionError):
    code = "infinite_virtual_temperature"


class SecondLawViolationError(QFridgeError, RuntimeError):
    code = "second_law_violation"


class ScenarioError(QFridgeError, ValueError):
    """Malformed scenario document; ``path`` names the offending key."""

    code = "scenario"

    def __init__(self, message, path=None):
        self.path = path
        if path:
            message = f"{path}: {message}"
        super().__init__(message)


class TruncationCapError(QFridgeError, RuntimeError):
    code = "truncation_cap_exceeded"
