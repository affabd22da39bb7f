"""Exception hierarchy shared by all modules."""


class CornerGrowthError(Exception):
    """Base class for all package errors."""


class ParameterError(CornerGrowthError, ValueError):
    """An argument is outside its legal domain."""


class InfeasibleEnsembleError(CornerGrowthError):
    """The path ensemble admits no path from (1,1) to (M,N)."""


class EnumerationCapError(CornerGrowthError):
    """Exact enumeration was refused because the path count exceeds the cap."""

    def __init__(self, count, cap):
        super().__init__(
            f"refusing to enumerate {count} paths (cap is {cap})"
        )
        self.count = count
        self.cap = cap
