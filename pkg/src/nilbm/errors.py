"""Exception hierarchy shared by all nilbm modules."""

from __future__ import annotations


class NilbmError(Exception):
    """Base class for every error raised by this package."""


class DimensionMismatch(NilbmError, ValueError):
    pass


class UnknownGroup(NilbmError, KeyError):
    def __str__(self) -> str:
        return str(self.args[0]) if self.args else "unknown group"


class AlgebraError(NilbmError):
    """The bracket data does not define a Lie algebra."""


class AntisymmetryViolation(AlgebraError):
    def __init__(self, i: int, j: int, k: int):
        self.triple = (i, j, k)
        super().__init__(f"antisymmetry fails at (i, j, k) = {self.triple} (1-based)")


class JacobiViolation(AlgebraError):
    def __init__(self, i: int, j: int, k: int, component: int | None = None):
        self.triple = (i, j, k)
        self.component = component
        msg = f"Jacobi identity fails for (i, j, k) = {self.triple} (1-based)"
        if component is not None:
            msg += f" in coordinate {component}"
        super().__init__(msg)


class NotNilpotent(AlgebraError):
    def __init__(self, dims: tuple[int, ...]):
        self.dims = dims
        super().__init__(f"lower central series stabilised at dimension {dims[-1]} (dims {dims})")


class NotStratifiable(AlgebraError):
    """The single deterministic candidate stratification failed its checks.

    This is *not* a proof that the algebra admits no stratification; only the
    complement selected by the pivoting rule was tried.
    """

    def __init__(self, reason: str):
        self.reason = reason
        super().__init__(
            f"candidate stratification failed: {reason} "
            "(only one complement was tried; this does not prove non-stratifiability)"
        )


class NonpositiveLambda(NilbmError, ValueError):
    pass


class BudgetExceeded(NilbmError):
    """Refinement hit the cell-pair cap.

    ``best`` carries the tightest certified result obtained before the cap.
    """

    def __init__(self, needed: int, budget: int, best=None):
        self.needed = needed
        self.budget = budget
        self.best = best
        super().__init__(f"{needed} cell pairs exceed the budget of {budget}")


class HypothesisViolated(NilbmError, ValueError):
    pass


class OutOfTheoremScope(HypothesisViolated):
    """Input falls in a case where no verdict is issued (e.g. horizontal,
    measure-zero cylinders whose equality behaviour is unknown)."""


class HypothesisUnverified(NilbmError):
    """The conservative pointwise check could not certify the hypothesis.

    Not a refutation: the interval enclosure may simply be too coarse.
    """

    def __init__(self, pair):
        self.pair = pair
        super().__init__(f"hypothesis not certified for support pair {pair}")
