"""Exception hierarchy shared by all modules."""


class IsoprofileError(Exception):
    """Base class for every error raised by this package."""


class DomainError(IsoprofileError, ValueError):
    """An argument lies outside the domain where the quantity is defined."""


class BracketError(DomainError):
    """A root-finding target is not bracketed by the supplied interval."""


class NonConvergence(IsoprofileError, ArithmeticError):
    """A numerical kernel exhausted its iteration or refinement budget."""


class SmallnessViolation(IsoprofileError):
    """The curvature excess is too large for the comparison bound to apply.

    Raised for k > 0 when the radius dilation factor exceeds 2, which is the
    range where the ball-radius comparison stops holding.
    """

    def __init__(self, factor: float):
        self.factor = factor
        super().__init__(f"dilation factor {factor:.6g} exceeds 2")
