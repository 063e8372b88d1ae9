"""Exception hierarchy shared by every module."""


class FieldKernelError(Exception):
    """Base class; ``code`` is the machine-readable tag used by the CLI."""

    code = "error"


class DomainError(FieldKernelError, ValueError):
    code = "domain"


class ConvergenceError(FieldKernelError, ArithmeticError):
    code = "convergence"


class NoInverseError(FieldKernelError, ArithmeticError):
    code = "no-inverse"


class InconsistentSourceError(FieldKernelError, ValueError):
    code = "inconsistent-source"


class TurningPointError(FieldKernelError, ArithmeticError):
    code = "turning-point"


class DivergenceError(FieldKernelError, ArithmeticError):
    code = "divergent"


class DegenerateError(FieldKernelError, ArithmeticError):
    code = "degenerate"


class BoundaryError(FieldKernelError, ValueError):
    code = "boundary"


class SingularityError(DomainError):
    code = "singular"


class UnsupportedOrderError(DomainError):
    code = "unsupported-order"
