"""
Error types shared by all services and the CLI.
Every error carries the process exit code the CLI should terminate with.
"""
from typing import Optional


class ProdTestError(Exception):
    """Base error; `exit_code` follows the CLI contract (1 = check failed, 2 = usage/input)."""
    exit_code: int = 2

    def __init__(self, detail: str, exit_code: Optional[int] = None):
        super().__init__(detail)
        self.detail = detail
        if exit_code is not None:
            self.exit_code = exit_code


class CapacityError(ProdTestError):
    """A configured dimension, enumeration or sweep cap would be exceeded."""


class DimensionMismatchError(ProdTestError):
    """Operands do not live in the same space."""


class InvalidStateError(ProdTestError):
    """Normalization, Hermiticity, trace or positivity invariant violated."""


class InvalidArgumentError(ProdTestError):
    """A precondition on an argument does not hold."""


class StateFileError(ProdTestError):
    """State or graph input file could not be parsed."""


class OracleExhaustedError(ProdTestError):
    """A StateOracle was asked for more copies than its budget allows."""


class RejectionBudgetError(ProdTestError):
    """Conditioned sampling ran out of tries."""
    exit_code = 1
