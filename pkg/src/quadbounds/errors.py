"""Exception types raised by the numerical pipeline."""


class QuadBoundsError(Exception):
    """Base class for all package errors."""


class InvalidMeshError(QuadBoundsError, ValueError):
    pass


class PositiveDefinitenessFailure(QuadBoundsError):
    """The Gram matrix failed a Cholesky factorization (broken basis or mesh)."""


class SingularMass(QuadBoundsError):
    """A0 could not be factorized, so the linearization is not well defined."""


class ConvergenceFailure(QuadBoundsError):
    """An eigensolver backend or the Newton refinement did not converge."""

    def __init__(self, message, **context):
        if context:
            detail = ", ".join(f"{k}={v!r}" for k, v in sorted(context.items()))
            message = f"{message} ({detail})"
        super().__init__(message)
        self.context = context
