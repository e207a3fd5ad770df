#!/usr/bin/env python3
"""
Exception hierarchy shared by every module of the toolkit.

The CLI maps these onto its exit codes (see adiabatic_elimination.py).
"""

from typing import Any, Optional


class AdiabaticEliminationError(Exception):
    """Base class for all toolkit errors."""


# ---------- matrices ----------

class InvalidMatrix(AdiabaticEliminationError, ValueError):
    """Not square, empty, or holding NaN/Inf entries."""


class DimensionMismatch(AdiabaticEliminationError, ValueError):
    pass


class SingularMatrix(AdiabaticEliminationError):
    """Smallest LU pivot fell below rel_tol times the largest one."""

    def __init__(self, message: str, pivot_ratio: float = 0.0):
        super().__init__(message)
        self.pivot_ratio = pivot_ratio


class NotHermitian(AdiabaticEliminationError, ValueError):
    def __init__(self, message: str, residual: float = float("nan")):
        super().__init__(message)
        self.residual = residual


# ---------- system definitions ----------

class InvalidSpec(AdiabaticEliminationError):
    """A SystemSpec failed validation; `report` holds every violation."""

    def __init__(self, report: Any):
        self.report = report
        lines = [str(v) for v in getattr(report, "violations", [])]
        super().__init__("invalid system spec:\n  " + "\n  ".join(lines) if lines else "invalid system spec")


class InvalidParameter(AdiabaticEliminationError, ValueError):
    pass


class InvalidState(AdiabaticEliminationError, ValueError):
    """Density matrix not Hermitian, not unit trace, or not positive."""


# ---------- effective operators ----------

class SingularPropagator(AdiabaticEliminationError):
    """(H_NH - E_l - w_f) is not invertible: a resonant, non-decaying channel."""

    def __init__(self, energy: float = 0.0, frequency: float = 0.0,
                 field: Optional[str] = None, pivot_ratio: float = 0.0):
        self.energy = energy
        self.frequency = frequency
        self.field = field
        self.pivot_ratio = pivot_ratio
        where = f"ground energy E_l={energy:.6g}"
        if field is not None or frequency != 0.0:
            where += f", field {field or '?'} at omega_f={frequency:.6g}"
        super().__init__(
            f"non-Hermitian propagator is singular ({where}, pivot ratio {pivot_ratio:.3g}); "
            "an excited state sits in resonance without decay"
        )


class ConsistencyError(AdiabaticEliminationError):
    """An algebraic identity of the formalism failed: an implementation bug."""

    def __init__(self, message: str, residual: float = float("nan")):
        super().__init__(message)
        self.residual = residual


class NonHermitianResult(ConsistencyError):
    pass


class UnknownLabel(AdiabaticEliminationError, LookupError):
    pass


class VariantPreconditionFailed(AdiabaticEliminationError):
    pass


# ---------- dynamics ----------

class StepTooLarge(AdiabaticEliminationError):
    def __init__(self, value: float, dt: float, suggested_dt: float, quantity: str = "trace drift"):
        self.value = value
        self.quantity = quantity
        self.dt = dt
        self.suggested_dt = suggested_dt
        super().__init__(
            f"{quantity} {value:.3g} exceeds tolerance at dt={dt:.6g}; try dt={suggested_dt:.6g}"
        )


class GridMismatch(AdiabaticEliminationError, ValueError):
    pass


# ---------- documents ----------

class ParseError(AdiabaticEliminationError):
    def __init__(self, message: str, field: Optional[str] = None,
                 line: Optional[int] = None, column: Optional[int] = None):
        self.field = field
        self.line = line
        self.column = column
        context = []
        if field:
            context.append(f"field {field}")
        if line is not None:
            context.append(f"line {line}" + (f", column {column}" if column is not None else ""))
        super().__init__(message + (f" ({'; '.join(context)})" if context else ""))
