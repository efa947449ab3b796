"""Exception types shared across the package."""


class JvfError(Exception):
    """Base class for all library-specific errors."""


class InvalidSignatureError(JvfError):
    """The signature space does not admit a Jacobi-type vector fraction."""


class ValidationError(JvfError):
    """A parameter set violates the fraction's hypotheses."""


class NonPositiveScaleError(ValidationError):
    def __init__(self, index, value):
        self.index = index
        self.value = value
        super().__init__(f"scale[{index}] = {value} is not positive")


class ShiftHasYComponentError(ValidationError):
    def __init__(self, index, value):
        self.index = index
        self.value = value
        super().__init__(
            f"shift[{index}] has nonzero embedding-axis component {value}"
        )


class DimensionMismatchError(ValidationError):
    def __init__(self, index, got, expected):
        self.index = index
        super().__init__(
            f"shift[{index}] has dimension {got}, expected {expected}"
        )


class OnBoundaryError(JvfError):
    """Z lies on the boundary hyperplane (zero embedding component)."""


class NotConvergedError(JvfError):
    """Evaluation reached the level cap before the error bound met the target."""

    def __init__(self, bound, levels):
        self.bound = bound
        self.levels = levels
        super().__init__(
            f"not converged after {levels} levels; achieved bound {bound:g}"
        )


class FragmentSingularError(JvfError):
    def __init__(self, index):
        self.index = index
        super().__init__(f"fragment {index} is zero or infinite")


class DegenerateDenominatorError(JvfError):
    """A scalar polynomial needed as a denominator vanished."""


class DegeneratePolynomialError(JvfError):
    """The embedding component of the vector polynomial vanished."""


class NoAttractiveFixedPointError(JvfError):
    """Direct iteration of the period map failed to settle (oscillatory Z)."""
