"""Exception types shared across the package."""


class HeatLabError(Exception):
    pass


class InputError(HeatLabError, ValueError):
    """Bad argument: dimension mismatch, empty grid, out-of-range exponent."""


class SizeError(InputError):
    """Requested object exceeds the desk-scale budget."""


class PreconditionError(HeatLabError):
    """A numerical precondition of an operation failed."""


class StrongPositivityError(PreconditionError):
    """Subtracting a potential would destroy positivity of the form.

    Carries the violating function so the failure can be inspected.
    """

    def __init__(self, margin, witness):
        self.margin = margin
        self.witness = witness
        super().__init__(
            "strong positivity margin %.6g <= 0; subtraction rejected" % margin
        )


class SchemaError(HeatLabError):
    """Config document does not match the expected schema."""

    def __init__(self, path, message):
        self.path = path
        super().__init__("%s: %s" % (path, message))
