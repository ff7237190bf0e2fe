"""Exception taxonomy shared across the lab.

Validation errors mean the caller handed us something malformed (bad
descriptor, dimension mismatch, non-monotone input where monotonicity is a
precondition).  Computation errors mean a numerical routine gave up
(infeasible LP, exhausted enumeration budget, coverage check that would not
close).  The CLI maps the former to exit code 2 and the latter to 3.
"""


class FblLabError(Exception):
    pass


class ValidationError(FblLabError, ValueError):
    pass


class DimensionMismatchError(ValidationError):
    pass


class ComputationError(FblLabError, RuntimeError):
    pass


class LPInfeasibleError(ComputationError):
    pass


class BudgetExceededError(ComputationError):
    pass
