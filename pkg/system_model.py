#!/usr/bin/env python3
"""
Open quantum system definitions and the ground/excited partition.

The Hilbert space is split by basis index into a ground block (P_g) and
an excited block (P_e = 1 - P_g). The Hamiltonian then falls into four
pieces H = H_g + H_e + V_+ + V_-, and every jump operator must map the
excited block onto the ground block (L_k = P_g L_k P_e).

The static `hamiltonian` is the time-independent (rotating-frame) part;
oscillating drives live only in `fields`. Nothing checks that a user did
not put the same drive in both places.
"""

import logging
from dataclasses import dataclass, field
from typing import List, NamedTuple, Optional, Sequence, Tuple

import numpy as np

from errors import InvalidParameter, InvalidSpec
from linalg_core import (
    TOL, adjoint, as_complex_matrix, hermiticity_residual, max_norm, projector, symmetrize,
)

logger = logging.getLogger(__name__)

# invariant names used in validation reports
DIMENSION = "dimension"
GROUND_SPLIT = "ground-split"
HAMILTONIAN_HERMITIAN = "hamiltonian-hermitian"
JUMP_DIRECTION = "jump-direction"
FIELD_BLOCK = "field-excitation-block"
UNIQUE_LABELS = "unique-labels"
BASIS_LABELS = "basis-labels"
FIELD_FREQUENCY = "field-frequency"
WEAK_DRIVE = "weak-drive"

WEAK_DRIVE_RATIO = 0.5


class Jump(NamedTuple):
    label: str
    op: np.ndarray


def make_jump(label: str, op) -> Jump:
    return Jump(str(label), as_complex_matrix(op, name=f"jump {label}"))


@dataclass(frozen=True, eq=False)
class FieldDrive:
    """A drive v_+ e^{-i omega t} + h.c.; v_plus must sit in the excited x ground block."""
    label: str
    v_plus: np.ndarray
    omega: float

    def __post_init__(self):
        object.__setattr__(self, "v_plus", as_complex_matrix(self.v_plus, name=f"field {self.label}"))
        object.__setattr__(self, "omega", float(self.omega))


@dataclass(frozen=True, eq=False)
class SystemSpec:
    dim: int
    ground_indices: Tuple[int, ...]
    hamiltonian: np.ndarray
    jumps: Tuple[Jump, ...] = ()
    fields: Tuple[FieldDrive, ...] = ()
    basis_labels: Optional[Tuple[str, ...]] = None

    def __post_init__(self):
        object.__setattr__(self, "dim", int(self.dim))
        object.__setattr__(self, "ground_indices", tuple(int(i) for i in self.ground_indices))
        object.__setattr__(self, "hamiltonian", as_complex_matrix(self.hamiltonian, name="hamiltonian"))
        object.__setattr__(self, "jumps", tuple(make_jump(*j) for j in self.jumps))
        object.__setattr__(self, "fields", tuple(self.fields))
        if self.basis_labels is not None:
            object.__setattr__(self, "basis_labels", tuple(str(s) for s in self.basis_labels))

    @property
    def excited_indices(self) -> Tuple[int, ...]:
        ground = set(self.ground_indices)
        return tuple(i for i in range(self.dim) if i not in ground)

    @property
    def p_g(self) -> np.ndarray:
        return projector(self.dim, self.ground_indices)

    @property
    def p_e(self) -> np.ndarray:
        return projector(self.dim, self.excited_indices)

    def label_of(self, index: int) -> str:
        if self.basis_labels is not None and index < len(self.basis_labels):
            return self.basis_labels[index]
        return str(index)


@dataclass(frozen=True, eq=False)
class Partition:
    h_g: np.ndarray
    h_e: np.ndarray
    v_plus: np.ndarray
    v_minus: np.ndarray
    p_g: np.ndarray
    p_e: np.ndarray
    ground_indices: Tuple[int, ...]
    excited_indices: Tuple[int, ...]

    @property
    def dim(self) -> int:
        return self.h_g.shape[0]


# ---------- validation ----------

@dataclass(frozen=True)
class Violation:
    invariant: str
    label: str
    residual: float
    message: str

    def __str__(self) -> str:
        return f"{self.invariant} [{self.label}]: {self.message} (residual {self.residual:.3g})"


@dataclass(frozen=True)
class Advisory:
    name: str
    ratio: float
    message: str

    def __str__(self) -> str:
        return f"{self.name}: {self.message} (ratio {self.ratio:.3g})"


@dataclass
class ValidationReport:
    violations: List[Violation] = field(default_factory=list)
    advisories: List[Advisory] = field(default_factory=list)

    @property
    def ok(self) -> bool:
        return not self.violations

    def invariants(self) -> List[str]:
        return [v.invariant for v in self.violations]


def decay_operator(jumps: Sequence[Jump], dim: int) -> np.ndarray:
    """sum_k L_k^dagger L_k"""
    total = np.zeros((dim, dim), dtype=np.complex128)
    for j in jumps:
        total += adjoint(j.op) @ j.op
    return total


def excited_decay_widths(spec: SystemSpec) -> np.ndarray:
    """Diagonal of sum_k L_k^dagger L_k on the excited states, in basis order."""
    gamma = decay_operator(spec.jumps, spec.dim)
    return np.real(np.diag(gamma))[list(spec.excited_indices)]


def _check_ground_split(spec: SystemSpec, report: ValidationReport) -> bool:
    ground = spec.ground_indices
    bad = [i for i in ground if i < 0 or i >= spec.dim]
    if bad:
        report.violations.append(Violation(GROUND_SPLIT, "ground_indices", float(len(bad)),
                                           f"indices {bad} outside 0..{spec.dim - 1}"))
        return False
    if len(set(ground)) != len(ground):
        report.violations.append(Violation(GROUND_SPLIT, "ground_indices", 0.0, "duplicate ground indices"))
        return False
    if not ground or len(ground) >= spec.dim:
        report.violations.append(Violation(
            GROUND_SPLIT, "ground_indices", float(len(ground)),
            "ground and excited subspaces must both be nonempty",
        ))
        return False
    return True


def _check_dims(spec: SystemSpec, report: ValidationReport) -> bool:
    ok = True
    items = [("hamiltonian", spec.hamiltonian)]
    items += [(j.label, j.op) for j in spec.jumps]
    items += [(f.label, f.v_plus) for f in spec.fields]
    for label, m in items:
        if m.shape[0] != spec.dim:
            report.violations.append(Violation(DIMENSION, label, float(abs(m.shape[0] - spec.dim)),
                                               f"dimension {m.shape[0]} != {spec.dim}"))
            ok = False
    if spec.basis_labels is not None and len(spec.basis_labels) != spec.dim:
        report.violations.append(Violation(BASIS_LABELS, "basis_labels", float(len(spec.basis_labels)),
                                           f"{len(spec.basis_labels)} labels for dimension {spec.dim}"))
    return ok


def _check_labels(spec: SystemSpec, report: ValidationReport) -> None:
    for kind, labels in (("jump", [j.label for j in spec.jumps]), ("field", [f.label for f in spec.fields])):
        dupes = sorted({s for s in labels if labels.count(s) > 1})
        for s in dupes:
            report.violations.append(Violation(UNIQUE_LABELS, s, float(labels.count(s)),
                                               f"{kind} label used more than once"))


def _weak_drive_advisory(spec: SystemSpec, report: ValidationReport) -> None:
    widths = excited_decay_widths(spec)
    min_width = float(widths.min()) if widths.size else 0.0
    pe, pg = spec.p_e, spec.p_g
    drives = [np.linalg.norm(pe @ spec.hamiltonian @ pg, 2)]
    drives += [np.linalg.norm(f.v_plus, 2) for f in spec.fields]
    drive = float(max(drives))
    if drive == 0.0:
        return
    if min_width <= 0.0 or drive > WEAK_DRIVE_RATIO * min_width:
        ratio = drive / min_width if min_width > 0.0 else float("inf")
        report.advisories.append(Advisory(
            WEAK_DRIVE, ratio,
            f"|V_+| = {drive:.3g} exceeds {WEAK_DRIVE_RATIO} x smallest excited decay width {min_width:.3g}; "
            "effective operators may be inaccurate",
        ))


def validate(spec: SystemSpec) -> ValidationReport:
    """Check every structural assumption; problems are returned, never raised."""
    report = ValidationReport()
    dims_ok = _check_dims(spec, report)
    split_ok = _check_ground_split(spec, report)
    _check_labels(spec, report)

    h = symmetrize(spec.hamiltonian)
    if h.shape[0] == spec.dim:
        residual = hermiticity_residual(h)
        if residual > TOL.hermiticity * max_norm(h):
            report.violations.append(Violation(HAMILTONIAN_HERMITIAN, "hamiltonian", residual,
                                               "hamiltonian is not Hermitian"))

    for f in spec.fields:
        if not np.isfinite(f.omega):
            report.violations.append(Violation(FIELD_FREQUENCY, f.label, float("inf"), "omega is not finite"))

    if dims_ok and split_ok:
        pg, pe = spec.p_g, spec.p_e
        for j in spec.jumps:
            residual = max_norm(j.op - pg @ j.op @ pe)
            if residual > TOL.jump_direction:
                report.violations.append(Violation(
                    JUMP_DIRECTION, j.label, residual,
                    "jump operator must map excited states onto ground states (L = P_g L P_e)",
                ))
        for f in spec.fields:
            residual = max_norm(f.v_plus - pe @ f.v_plus @ pg)
            if residual > TOL.block_support:
                report.violations.append(Violation(
                    FIELD_BLOCK, f.label, residual,
                    "field v_plus must be a pure excitation block (v_+ = P_e v_+ P_g)",
                ))
        _weak_drive_advisory(spec, report)

    for a in report.advisories:
        logger.warning("advisory: %s", a)
    return report


def require_valid(spec: SystemSpec) -> None:
    report = validate(spec)
    if not report.ok:
        raise InvalidSpec(report)


# ---------- partition and assembly ----------

def partition(spec: SystemSpec) -> Partition:
    """
    Split H into H_g, H_e, V_+, V_- by entry masking.

    H is symmetrized first: validation accepts Hermiticity to a relative
    tolerance, and V_- must be exactly V_+^dagger. An exactly Hermitian H
    passes through bit for bit.
    """
    require_valid(spec)
    pg = np.real(np.diag(spec.p_g))
    pe = np.real(np.diag(spec.p_e))
    h = symmetrize(spec.hamiltonian)
    blocks = []
    for rows, cols in ((pg, pg), (pe, pe), (pe, pg), (pg, pe)):
        b = h * np.outer(rows, cols)
        b.setflags(write=False)
        blocks.append(b)
    h_g, h_e, v_plus, v_minus = blocks
    return Partition(h_g, h_e, v_plus, v_minus, spec.p_g, spec.p_e,
                     spec.ground_indices, spec.excited_indices)


def hamiltonian_at(spec: SystemSpec, t: float) -> np.ndarray:
    """Unchecked H(t); callers validate the spec once up front."""
    h = np.array(spec.hamiltonian)
    for f in spec.fields:
        term = f.v_plus * np.exp(-1j * f.omega * t)
        h += term + adjoint(term)
    return h


def assemble_time_dependent_hamiltonian(spec: SystemSpec, t: float) -> np.ndarray:
    """H + sum_f (v_+^f e^{-i w_f t} + h.c.) at time t."""
    require_valid(spec)
    return hamiltonian_at(spec, float(t))


def static_drive_as_field(spec: SystemSpec, label: str = "drive", omega: float = 0.0) -> SystemSpec:
    """Same system with the static V_+/V_- moved from H into a FieldDrive at `omega`."""
    part = partition(spec)
    if any(f.label == label for f in spec.fields):
        raise InvalidParameter(f"field label {label!r} already in use")
    return SystemSpec(
        dim=spec.dim,
        ground_indices=spec.ground_indices,
        hamiltonian=part.h_g + part.h_e,
        jumps=spec.jumps,
        fields=spec.fields + (FieldDrive(label, part.v_plus, omega),),
        basis_labels=spec.basis_labels,
    )
