"""Exception hierarchy shared by the library and the command line."""

from typing import List, Optional


class CosseratError(Exception):
    """Base class for every error raised by this package"""

    exit_code = 1


class ConfigError(CosseratError):
    """Malformed run configuration, unknown keys or missing input files"""

    exit_code = 2


class ValidationError(CosseratError, ValueError):
    """Input data violates a mathematical precondition"""

    exit_code = 3


class DomainError(ValidationError):
    """Operation applied outside its domain (degree overflow, improper motion)"""


class BranchError(DomainError):
    """Logarithm requested beyond the principal branch"""


class ChainError(ValidationError):
    """Chains that are open, out of range or not bounding each other"""


class SolverError(CosseratError):
    """Linear solve failed; carries the residual history for diagnostics"""

    exit_code = 4

    def __init__(self, message: str, residual_history: Optional[List[float]] = None):
        super().__init__(message)
        self.residual_history = list(residual_history or [])


class VerificationFailure(CosseratError):
    """At least one property check of the verification suite failed"""

    exit_code = 1
