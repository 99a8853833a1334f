"""Exceptions raised by the rho-lab library and the CLI exit codes"""
from enum import IntEnum


class ExitCode(IntEnum):
    OK = 0
    CHECK_FAILED = 1
    USAGE = 2


class RhoLabError(ValueError):
    """Base class for every error raised by the library"""


class DimensionError(RhoLabError):
    """Shapes or declared dimensions do not fit together"""


class DimensionLimitError(DimensionError):
    """Result would exceed the configured maximum dimension"""


class NotHermitianError(RhoLabError):
    pass


class NonPhysicalError(RhoLabError):
    """Object violates positivity, trace or Bloch-ball bounds"""


class ProbabilityError(RhoLabError):
    """Negative probabilities, or probabilities that do not sum to one"""


class OrthonormalityError(RhoLabError):
    pass


class ConstantFormError(RhoLabError):
    """Affine form does not depend on the polarization, so it has no unique extremum"""


class BornPreconditionError(RhoLabError):
    """Apparatus does not send the given state to the first branch with certainty"""


class OrderingError(RhoLabError):
    """Grid parameters are not ordered as xi < lambda < eta"""


class RangeError(RhoLabError):
    """Index, rank or grid parameter outside its allowed range"""


class ConfigError(RhoLabError):
    """Invalid suite configuration or experiment description"""
