from typing import Optional


class ConstructionError(Exception):
    """Base class for every error raised by the construction pipeline."""


class ParameterError(ConstructionError, ValueError):
    """Parameters violate a precondition or invariant."""


class PartitionError(ConstructionError, ValueError):
    """A block partition is malformed or incompatible with n and r."""


class DimensionError(ConstructionError, ValueError):
    """Two structures disagree on their vertex count."""


class PreconditionError(ConstructionError, ValueError):
    """An operation was called on input outside its domain."""


class EnumerationCapExceeded(ConstructionError):
    """A cycle search visited more DFS nodes than allowed."""

    def __init__(self, cap: int, what: str = "cycles"):
        super().__init__(f"enumeration of {what} exceeded the cap of {cap} visits")
        self.cap = cap
        self.what = what


class ConvergenceError(ConstructionError):
    """An iterative eigen-solver did not certify within its iteration cap."""

    def __init__(self, iterations: int, residual: float):
        super().__init__(
            f"eigen-solver did not converge after {iterations} iterations "
            f"(residual {residual:.3e})"
        )
        self.iterations = iterations
        self.residual = residual


class SizeCapExceeded(ConstructionError):
    """An exact solver was asked to handle more vertices than its cap."""


class InstanceFormatError(ConstructionError, ValueError):
    """A stored instance file could not be parsed."""

    def __init__(self, message: str, line: Optional[int] = None):
        prefix = f"line {line}: " if line is not None else ""
        super().__init__(prefix + message)
        self.line = line
