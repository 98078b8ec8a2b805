"""Exception and warning types shared across the package."""


class DiscCertError(Exception):
    """Base class for all errors raised by this package."""


class GuardInsufficient(DiscCertError):
    """The guard bits of a real sample cannot settle its b-bit truncation.

    Callers should resample the underlying value at higher precision.
    """


class NotPositiveDefinite(DiscCertError):
    """A quadratic form failed the exact positive-definiteness check."""


class DimensionTooLarge(DiscCertError):
    """An exhaustive computation was requested above its dimension guard."""


class SingularIntermediate(DiscCertError):
    """The weight iteration produced a numerically singular form twice."""


class SandwichFailure(DiscCertError):
    """Exact verification of the ellipsoid sandwich failed.

    Carries the outer-containment value c * sum(w) that exceeded the bound.
    """

    def __init__(self, outer_value):
        self.outer_value = outer_value
        super().__init__(f"outer containment failed: c*sum(w) = {outer_value}")


class FormatError(DiscCertError):
    """An instance or certificate file does not match its documented format."""


class InsufficientPrecisionWarning(UserWarning):
    """Advisory: a partition instance's bit width is below the completeness
    threshold; certification is still attempted and remains sound."""

    def __init__(self, b_given: int, b_required: int):
        self.b_given = b_given
        self.b_required = b_required
        super().__init__(
            f"instance has b={b_given} bits; completeness analysis wants b>={b_required}"
        )
