"""Exception hierarchy shared by the solver modules and the CLI."""

from __future__ import annotations


class SplitRelaxError(Exception):
    """Base class for all library errors."""

    exit_code = 1


class ConfigError(SplitRelaxError, ValueError):
    """Invalid grid, case, scheme or CLI configuration."""

    exit_code = 1


class NumericalError(SplitRelaxError, ArithmeticError):
    """A numerical failure: non-physical state or solver breakdown."""

    exit_code = 2


class StateError(NumericalError):
    """A non-finite or non-positive state quantity.

    Carries the offending quantity name and, when raised from a sweep over a
    field, the (interior) cell index of the first bad cell.
    """

    def __init__(self, message, quantity=None, cell=None, stage=None):
        self.quantity = quantity
        self.cell = cell
        self.stage = stage
        parts = [message]
        if quantity is not None:
            parts.append(f"quantity={quantity}")
        if cell is not None:
            parts.append(f"cell={cell}")
        if stage is not None:
            parts.append(f"stage={stage}")
        super().__init__(", ".join(parts))


class SolverError(NumericalError):
    """Iterative linear solver did not reach its tolerance."""

    def __init__(self, message, residual=None, iterations=None):
        self.residual = residual
        self.iterations = iterations
        if residual is not None:
            message = f"{message}, residual={residual:.3e}"
        if iterations is not None:
            message = f"{message}, iterations={iterations}"
        super().__init__(message)


class VacuumError(NumericalError):
    """Riemann data that generates vacuum."""


class OutputError(SplitRelaxError, OSError):
    """Reading or writing result files failed."""

    exit_code = 3
