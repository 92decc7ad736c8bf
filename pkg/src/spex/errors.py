class SpexError(ValueError):
    """Domain error: the inputs violate a mathematical precondition."""


class BudgetExceeded(SpexError):
    """Refusal to run a computation whose work estimate exceeds the budget."""

    def __init__(self, what: str, work: int, budget: int):
        super().__init__(f"{what}: work {work} exceeds budget {budget} (raise with --budget or SPEX_BUDGET)")
        self.what = what
        self.work = work
        self.budget = budget
