"""
Exception hierarchy for the SVIR toolkit
"""
from typing import Optional


class ToolkitError(Exception):
    """Base class for all toolkit failures"""


class ModelDomainError(ToolkitError, ValueError):
    """Input outside the mathematical domain of an operation"""


class ThresholdDegenerateError(ModelDomainError):
    """A quantity is undefined exactly at a threshold (e.g. R01 = 1)"""


class NormalizationError(ModelDomainError):
    """Normalization by a zero reproduction number"""


class IntegrationError(ToolkitError, RuntimeError):
    """Integration could not proceed"""

    def __init__(self, message: str, time: float):
        super().__init__(f"{message} (t={time:.6g})")
        self.time = time


class NoEndemicEquilibriumError(ToolkitError):
    """Newton iteration did not produce an endemic steady state"""


class DiseaseFreeCoincidenceError(NoEndemicEquilibriumError):
    """Newton iteration converged onto the disease-free state"""

    def __init__(self, message: str, state=None):
        super().__init__(message)
        self.state = state


class EigenSolverError(ToolkitError, ArithmeticError):
    """Eigenvalue computation failed or produced unacceptable residuals"""

    def __init__(self, message: str, matrix=None):
        if matrix is not None:
            message = f"{message}\nmatrix=\n{matrix}"
        super().__init__(message)
        self.matrix = matrix


class DegenerateBifurcationError(ToolkitError):
    """Null space at the critical transmission rate is not one-dimensional"""


class CaseSeriesError(ToolkitError, ValueError):
    """Malformed case series input"""

    def __init__(self, message: str, line: Optional[int] = None):
        if line is not None:
            message = f"line {line}: {message}"
        super().__init__(message)
        self.line = line
