"""Exception hierarchy shared by all bathdisc modules.

Every error carries a short machine-readable ``code``. The CLI maps
:class:`ValidationError` to exit status 1 and :class:`NumericalError` to
exit status 2.
"""


class BathDiscError(Exception):
    code = "error"

    def __init__(self, message, code=None):
        super().__init__(message)
        if code is not None:
            self.code = code


class ValidationError(BathDiscError, ValueError):
    """Bad input: malformed parameters, violated invariants, schema errors."""

    code = "validation"


class UnsupportedFamilyError(ValidationError):
    code = "unsupported_family"


class RangeError(ValidationError):
    code = "out_of_range"


class NumericalError(BathDiscError, ArithmeticError):
    """A numerical procedure failed to reach its stated tolerance."""

    code = "numerical"


class ConvergenceError(NumericalError):
    code = "no_convergence"

    def __init__(self, message, achieved=None):
        super().__init__(message)
        self.achieved = achieved


class IllConditionedError(NumericalError):
    code = "ill_conditioned"


class SaturationError(NumericalError):
    code = "saturated"

    def __init__(self, message, bound_at_max=None):
        super().__init__(message)
        self.bound_at_max = bound_at_max


class DimensionError(ValidationError):
    code = "dimension_cap"
