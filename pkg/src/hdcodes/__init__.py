"""Lattice, exterior-power and chain-complex tools for CSS codes built from
high-dimensional manifolds (cubulated tori, simplex spheres and products of
hypercube spheres)."""

__version__ = "0.1.0"


class BudgetExceeded(RuntimeError):
    """An exponential enumeration would exceed its configured budget."""

    def __init__(self, what, budget, needed=None):
        self.what = what
        self.budget = budget
        self.needed = needed
        msg = f"{what}: budget {budget} exceeded"
        if needed is not None:
            msg += f" (needs {needed})"
        super().__init__(msg)
