"""Exception types shared across the package."""


class SpeclabError(Exception):
    """Base class for all speclab errors."""


class DomainError(SpeclabError, ValueError):
    """An argument violates a documented precondition."""


class EigensolverError(SpeclabError, RuntimeError):
    """The eigensolver could not produce a trustworthy result.

    Carries the last iterate and its residual so callers can diagnose
    non-convergence.
    """

    def __init__(self, message, iterate=None, residual=None):
        super().__init__(message)
        self.iterate = iterate
        self.residual = residual


class ReducibleOperatorError(SpeclabError, ValueError):
    """The operator is reducible where irreducibility is required.

    ``block`` is a witnessing index set A: the support graph has no edge
    from A into its complement.
    """

    def __init__(self, message, block):
        super().__init__(message)
        self.block = list(block)


class FamilyToleranceError(SpeclabError, RuntimeError):
    """Family members do not share a common Perron product density."""


class CrossCheckError(SpeclabError, RuntimeError):
    """An internal consistency identity failed beyond tolerance."""
