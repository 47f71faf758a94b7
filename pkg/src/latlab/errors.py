"""Exception hierarchy shared by all latlab modules."""


class LatlabError(Exception):
    pass


class BudgetExceeded(LatlabError):
    """An enumeration or search hit its configured cap."""

    def __init__(self, message, partial=None):
        super().__init__(message)
        self.partial = partial


class EnumerationBudgetExceeded(BudgetExceeded):
    pass


class NeighborBudgetExceeded(BudgetExceeded):
    pass


# number fields
class NotTotallyReal(LatlabError):
    pass


class RepeatedRoot(LatlabError):
    pass


class NotIrreducible(LatlabError):
    pass


class PrecisionExhausted(LatlabError):
    pass


class ZeroElement(LatlabError):
    pass


class NotAUnit(LatlabError):
    pass


class NonIntegralElement(LatlabError):
    pass


class DegenerateSpan(LatlabError):
    pass


# lattices
class SingularBasis(LatlabError):
    pass


class SingularMinor(LatlabError):
    pass


# orbits
class SingularModule(LatlabError):
    pass


class EmptyMeasure(LatlabError):
    pass


class RejectionStall(LatlabError):
    pass


class ClosingMismatch(LatlabError):
    pass


class NotFound(LatlabError):
    def __init__(self, message, best=None):
        super().__init__(message)
        self.best = best


# constructions
class BadCongruence(LatlabError):
    pass


class HenselFailure(LatlabError):
    pass


class RootCertificationFailure(LatlabError):
    pass


class NodesTooClose(LatlabError):
    pass


class PrimeLadderExhausted(LatlabError):
    pass
