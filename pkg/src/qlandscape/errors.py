"""Exception hierarchy for qlandscape."""


class QLandscapeError(ValueError):
    """Base class for all validation errors raised by this package."""


class NonHermitianInput(QLandscapeError):
    pass


class NonUnitary(QLandscapeError):
    pass


class TimeMismatch(QLandscapeError):
    pass


class InvalidGrid(QLandscapeError):
    pass


class InvalidTask(QLandscapeError):
    pass


class CommutingSystem(QLandscapeError):
    """Drift and coupling commute, so the system is not controllable."""


class UnsupportedSystem(QLandscapeError):
    """The analytic kernel only exists for drift sigma_z and in-plane coupling."""


class NotCoplanar(QLandscapeError):
    pass


class ZeroInPlaneVector(QLandscapeError):
    pass


class OutOfDomain(QLandscapeError):
    pass


class BumpOutOfWindow(QLandscapeError):
    pass


class EpsNotOnGrid(QLandscapeError):
    pass


class NonTracelessV(QLandscapeError):
    pass


class ZeroCoupling(QLandscapeError):
    pass


class DegenerateDrift(QLandscapeError):
    pass


class TimeTooShort(QLandscapeError):
    pass


class ConfigError(QLandscapeError):
    pass


class DataFileError(QLandscapeError):
    """Unreadable, empty, malformed or wrongly sized input data file."""
