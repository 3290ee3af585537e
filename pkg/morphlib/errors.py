class MorphError(Exception):
    pass


class ConfigError(MorphError):
    pass


class NumericalError(MorphError):
    pass


class AngleNearPi(NumericalError):
    """Rotation angle too close to pi for a unique logarithm."""


class NumericallySingular(NumericalError):
    """A (damped) Gram matrix could not be inverted."""


class ConstraintUnsatisfiable(NumericalError):
    pass


class DataError(MorphError):
    pass


class DimensionMismatch(DataError):
    pass


class EmptyWindow(DataError):
    pass


class UnknownLabel(DataError):
    pass


class FormatError(DataError):
    pass
