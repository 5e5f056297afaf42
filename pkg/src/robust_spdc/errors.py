"""Exception hierarchy shared by the library and the command-line front end."""


class RobustSPDCError(Exception):
    """Base class for all errors raised by this package."""


class InvalidSegmentError(RobustSPDCError, ValueError):
    pass


class InvalidArgumentError(RobustSPDCError, ValueError):
    pass


class OracleError(RobustSPDCError, RuntimeError):
    """The ODE oracle did not converge to the requested tolerance."""


class CalibrationError(RobustSPDCError, RuntimeError):
    pass


class ConfigurationError(RobustSPDCError, ValueError):
    """A requested deviation axis has no calibrated coefficient."""


class DegenerateDesignError(RobustSPDCError, ValueError):
    """The design produces no pairs at its working point."""


class InsufficientRangeError(RobustSPDCError, ValueError):
    """A scan does not contain both 90% crossings around the peak."""


class NumericalConsistencyError(RobustSPDCError, RuntimeError):
    """Analytic and finite-difference derivatives disagree."""


class RegimeViolationError(RobustSPDCError, ValueError):
    """A family member is not in the harmonic regime, so its length is undefined."""


class FabricationError(RobustSPDCError, ValueError):
    pass


class DesignFileError(RobustSPDCError, ValueError):
    """A design, constraint or pattern file is unreadable or malformed.

    ``field`` names the offending entry when one can be identified.
    """

    def __init__(self, message: str, field: str | None = None):
        self.field = field
        super().__init__(f"{field}: {message}" if field else message)
