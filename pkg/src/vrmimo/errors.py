"""Exception types shared across the package."""


class VrMimoError(Exception):
    """Base class for everything raised deliberately by this package."""


class ShapeError(VrMimoError):
    """Operands have incompatible or malformed dimensions."""


class InvalidParam(VrMimoError):
    """A scalar parameter is outside its documented range."""


class InvalidVR(VrMimoError):
    """Visibility region is empty, has repeated indices, or references
    antennas outside the array."""


class NotPSD(VrMimoError):
    """A matrix that must be Hermitian positive semidefinite is not
    (eigenvalue clearly below zero, or not Hermitian to begin with)."""


class DegenerateChannel(VrMimoError):
    """Channel matrix is identically zero; no precoder normalization exists."""


class SingularChannel(VrMimoError):
    """Channel matrix is numerically rank deficient; zero-forcing undefined."""


class InvalidScenario(VrMimoError):
    """Placement parameters violate a scenario precondition
    (e.g. the tiling divisibility requirements)."""


class ConfigError(VrMimoError):
    """Experiment configuration file or override could not be parsed or
    fails validation."""
