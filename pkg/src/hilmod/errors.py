"""Exception types shared across the package."""


class HilmodError(Exception):
    """Base class for all library errors."""


class ShapeMismatch(HilmodError):
    """Operands live over different algebra shapes or module ranks."""


class NotHermitian(HilmodError):
    """Element failed the Hermiticity check required by the operation."""


class NotPositive(HilmodError):
    """Element has an eigenvalue below the negative tolerance band."""


class Singular(HilmodError):
    """A block (or the flattened system) is numerically singular."""

    def __init__(self, message: str, block_index: int | None = None):
        super().__init__(message)
        self.block_index = block_index


class ZeroElement(HilmodError):
    """Operation requires a nonzero element."""


class NotLinear(HilmodError):
    """Black-box functional failed the module-linearity probe."""


class NotSesquilinear(HilmodError):
    """Black-box form failed a sesquilinearity probe; carries the probe data."""

    def __init__(self, message: str, probe: dict | None = None):
        super().__init__(message)
        self.probe = probe or {}


class NotFull(HilmodError):
    """Generating family does not span the coefficient algebra."""

    def __init__(self, message: str, missed_dimension: int = 0):
        super().__init__(message)
        self.missed_dimension = missed_dimension


class NotPositiveOperator(HilmodError):
    """Operator is not positive on the flattened space."""


class NoWitnessFound(HilmodError):
    """Witness search exhausted its budget; inconclusive, not a disproof."""


class NotNested(HilmodError):
    """Submodule family is not increasing under inclusion."""


class LevelCertificateFailed(HilmodError):
    """A restricted coercivity certificate failed at one family level."""

    def __init__(self, message: str, level: int):
        super().__init__(message)
        self.level = level


class SingularOperator(Singular):
    """Solve hit a singular flattened operator despite a certificate."""


class ResidualTooLarge(HilmodError):
    """Solution failed the post-solve residual verification."""
