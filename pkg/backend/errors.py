class OrbitCalcError(ValueError):
    """Base class for every domain error raised by the backend."""


class ShapeError(OrbitCalcError):
    """Matrix or representation shapes do not fit together."""


class NotNilpotentError(OrbitCalcError):
    """A matrix is outside the required nilpotent variety."""


class InvalidBlocksError(OrbitCalcError):
    """Block sizes are empty, non-positive or inconsistent with n."""


class InvalidPatternError(OrbitCalcError):
    """An enhanced oriented link pattern fails its capacity constraints."""


class DimensionVectorError(OrbitCalcError):
    """A decomposition does not have the dimension vector of the block data."""


class NotGenericError(OrbitCalcError):
    """A matrix lies outside the generic locus of a normal form."""


class IndexConstraintError(OrbitCalcError):
    """Indices of a built-in datum or label are out of range."""


class WitnessConstructionError(OrbitCalcError):
    """A witness family member failed its nilpotency postcondition."""


class PreconditionError(OrbitCalcError):
    """A documented precondition of an operation is violated."""
