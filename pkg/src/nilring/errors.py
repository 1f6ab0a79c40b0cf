"""Exception types shared across the package."""


class NilringError(Exception):
    """Base class for errors raised by nilring."""


class BudgetExceeded(NilringError):
    """An enumeration would exceed the configured work budget.

    ``work`` is the estimated number of elementary operations and ``budget``
    the limit that was in force.
    """

    def __init__(self, what, work, budget):
        self.what = what
        self.work = work
        self.budget = budget
        super().__init__(f"{what}: estimated work {work} exceeds budget {budget}")


class PreconditionError(NilringError, ValueError):
    """A numerical precondition of an operation does not hold."""


DEFAULT_WORK_BUDGET = 10**8


def check_budget(what, work, budget=None):
    budget = DEFAULT_WORK_BUDGET if budget is None else budget
    if work > budget:
        raise BudgetExceeded(what, work, budget)
