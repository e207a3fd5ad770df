#!/usr/bin/env python3
"""
Effective ground-state operators obtained by adiabatic elimination.

All variants share one recipe: build the non-Hermitian Hamiltonian of the
excited block, H_NH = H_e - (i/2) sum_k L_k^dagger L_k, invert it (possibly
shifted by a dressed ground energy E_l and/or a field frequency w_f), and
sandwich the propagator between the drive blocks:

    H_eff   = -1/2 [ V_- S + (V_- S)^dagger ] + H_g
    L_eff^k = L_k S

where S = H_NH^-1 V_+ (basic), sum_l (H_NH - E_l)^-1 V_+ P_l (dressed),
sum_f (H_NH - w_f)^-1 v_+^f e^{-i w_f t} (fields), or the double sum over
f and l (general). Only second-order terms are kept.
"""

import logging
from collections import OrderedDict
from dataclasses import dataclass
from enum import Enum
from typing import Dict, List, NamedTuple, Optional, Sequence, Tuple

import numpy as np

from errors import (
    ConsistencyError, InvalidParameter, NonHermitianResult, SingularMatrix,
    SingularPropagator, UnknownLabel, VariantPreconditionFailed,
)
from linalg_core import (
    Eigenspace, adjoint, hermitian_eigendecomposition, hermiticity_residual,
    mat_inverse, max_norm, relative_residual, symmetrize,
)
from system_model import FieldDrive, Jump, Partition, WEAK_DRIVE_RATIO, decay_operator

logger = logging.getLogger(__name__)

IDENTITY_TOL = 1e-10
STATIC_DRIVE_LABEL = "static"


class Variant(str, Enum):
    BASIC = "basic"
    DRESSED = "dressed"
    FIELDS = "fields"
    GENERAL = "general"


@dataclass(frozen=True, eq=False)
class EffectiveModel:
    h_eff: np.ndarray
    l_eff: Tuple[Jump, ...]
    variant: Variant
    h_nh: np.ndarray
    partition: Partition
    time: Optional[float] = None   # set on snapshots of time-dependent variants

    @property
    def dim(self) -> int:
        return self.h_eff.shape[0]

    @property
    def ground_indices(self) -> Tuple[int, ...]:
        return self.partition.ground_indices

    @property
    def labels(self) -> List[str]:
        return [j.label for j in self.l_eff]

    def jump(self, label: str) -> Jump:
        for j in self.l_eff:
            if j.label == label:
                return j
        raise UnknownLabel(f"no effective jump operator labelled {label!r} (have {self.labels})")


class PropagatorElement(NamedTuple):
    row: int
    col: int
    propagator: complex          # <e_row| H_NH^-1 |e_col>
    effective: complex           # 1 / propagator, inf when the element vanishes


# ---------- building blocks ----------

def nh_hamiltonian(h_e: np.ndarray, jumps: Sequence[Jump]) -> np.ndarray:
    """H_NH = H_e - (i/2) sum_k L_k^dagger L_k"""
    h_nh = np.asarray(h_e, dtype=np.complex128) - 0.5j * decay_operator(jumps, h_e.shape[0])
    h_nh.setflags(write=False)
    return h_nh


def _propagator(h_nh: np.ndarray, part: Partition, energy: float = 0.0,
                frequency: float = 0.0, field: Optional[str] = None) -> np.ndarray:
    """(H_NH - E_l - w_f)^-1 on the excited block, zero elsewhere."""
    shifted = h_nh - (energy + frequency) * part.p_e
    try:
        return mat_inverse(shifted, restricted_to=part.excited_indices)
    except SingularMatrix as e:
        raise SingularPropagator(energy=energy, frequency=frequency, field=field,
                                 pivot_ratio=e.pivot_ratio) from e


def _ground_block(m: np.ndarray, part: Partition) -> np.ndarray:
    out = part.p_g @ m @ part.p_g
    out.setflags(write=False)
    return out


def _effective_hamiltonian(x: np.ndarray, part: Partition) -> np.ndarray:
    """-1/2 (X + X^dagger) + H_g, checked Hermitian before the final symmetrization."""
    h = -0.5 * (x + adjoint(x)) + part.h_g
    residual = hermiticity_residual(h)
    if residual > IDENTITY_TOL * max(max_norm(h), 1.0e-300):
        raise NonHermitianResult(f"effective Hamiltonian is not Hermitian (residual {residual:.3g})",
                                 residual=residual)
    return _ground_block(symmetrize(h), part)


def _dressed_states(part: Partition) -> List[Eigenspace]:
    return hermitian_eigendecomposition(part.h_g, restricted_to=part.ground_indices)


def _advise_perturbative_ground(part: Partition, jumps: Sequence[Jump]) -> None:
    widths = np.real(np.diag(decay_operator(jumps, part.dim)))[list(part.excited_indices)]
    min_width = float(widths.min()) if widths.size else 0.0
    strength = float(np.linalg.norm(part.h_g, 2))
    if strength > 0.0 and (min_width <= 0.0 or strength > WEAK_DRIVE_RATIO * min_width):
        logger.warning("ground-state Hamiltonian |H_g| = %.3g is not perturbative against the smallest "
                       "excited decay width %.3g; the fields variant assumes it is", strength, min_width)


# ---------- time-independent variants ----------

def effective_operators_basic(part: Partition, jumps: Sequence[Jump]) -> EffectiveModel:
    """H_eff = -1/2 V_- (H_NH^-1 + H_NH^-1^dagger) V_+ + H_g,  L_eff^k = L_k H_NH^-1 V_+"""
    h_nh = nh_hamiltonian(part.h_e, jumps)
    g = _propagator(h_nh, part)
    h_eff = -0.5 * part.v_minus @ (g + adjoint(g)) @ part.v_plus + part.h_g
    residual = hermiticity_residual(h_eff)
    if residual > IDENTITY_TOL * max(max_norm(h_eff), 1.0e-300):
        raise NonHermitianResult(f"effective Hamiltonian is not Hermitian (residual {residual:.3g})",
                                 residual=residual)
    s = g @ part.v_plus
    l_eff = tuple(Jump(j.label, _ground_block(j.op @ s, part)) for j in jumps)
    return EffectiveModel(_ground_block(symmetrize(h_eff), part), l_eff, Variant.BASIC, h_nh, part)


def effective_operators_dressed(part: Partition, jumps: Sequence[Jump]) -> EffectiveModel:
    """Propagators (H_NH - E_l)^-1 per dressed ground state of a nonperturbative H_g."""
    h_nh = nh_hamiltonian(part.h_e, jumps)
    s = np.zeros_like(h_nh)
    for space in _dressed_states(part):
        g = _propagator(h_nh, part, energy=space.energy)
        s += g @ part.v_plus @ space.projector
    h_eff = _effective_hamiltonian(part.v_minus @ s, part)
    l_eff = tuple(Jump(j.label, _ground_block(j.op @ s, part)) for j in jumps)
    return EffectiveModel(h_eff, l_eff, Variant.DRESSED, h_nh, part)


# ---------- time-dependent variants ----------

@dataclass(frozen=True, eq=False)
class FieldTerm:
    label: str
    omega: float
    v_plus: np.ndarray
    a: np.ndarray            # A_f = sum_l (H_NH - E_l - w_f)^-1 v_+^f P_l


@dataclass(frozen=True, eq=False)
class FieldEffectiveModel:
    """Precomputed propagator products plus a cheap evaluator of H_eff(t), L_eff^k(t)."""
    variant: Variant
    terms: Tuple[FieldTerm, ...]
    jumps: Tuple[Jump, ...]
    h_nh: np.ndarray
    partition: Partition

    @property
    def dim(self) -> int:
        return self.h_nh.shape[0]

    @property
    def ground_indices(self) -> Tuple[int, ...]:
        return self.partition.ground_indices

    @property
    def frequencies(self) -> List[float]:
        return sorted({t.omega for t in self.terms})

    @property
    def time_independent(self) -> bool:
        return all(t.omega == 0.0 for t in self.terms)

    def static_blocks(self) -> List[Tuple[str, float, np.ndarray]]:
        return [(t.label, t.omega, t.a) for t in self.terms]

    def at(self, t: float) -> EffectiveModel:
        part = self.partition
        s = np.zeros_like(self.h_nh)
        v_minus = np.zeros_like(self.h_nh)
        for term in self.terms:
            phase = np.exp(-1j * term.omega * t)
            s += term.a * phase
            v_minus += adjoint(term.v_plus) * np.conj(phase)
        h_eff = _effective_hamiltonian(v_minus @ s, part)
        l_eff = tuple(Jump(j.label, _ground_block(j.op @ s, part)) for j in self.jumps)
        return EffectiveModel(h_eff, l_eff, self.variant, self.h_nh, part, time=float(t))

    def time_averaged_rate(self, label: str, source: int, target: int) -> float:
        """|<target|L_eff^k(t)|source>|^2 averaged over the beat period of all fields."""
        _check_ground(self.partition, source, target)
        jump = _find_jump(self.jumps, label)
        amplitudes: Dict[float, complex] = OrderedDict()
        for term in self.terms:
            amplitudes[term.omega] = amplitudes.get(term.omega, 0.0) + (jump.op @ term.a)[target, source]
        return float(sum(abs(c) ** 2 for c in amplitudes.values()))


def _drives(part: Partition, fields: Sequence[FieldDrive]) -> List[Tuple[str, float, np.ndarray]]:
    """Every excitation block with its frequency; a static V_+ counts as a drive at w = 0."""
    drives = []
    if max_norm(part.v_plus) > 0.0:
        drives.append((STATIC_DRIVE_LABEL, 0.0, part.v_plus))
    drives += [(f.label, f.omega, f.v_plus) for f in fields]
    return drives


def effective_operators_fields(part: Partition, jumps: Sequence[Jump],
                               fields: Sequence[FieldDrive]) -> FieldEffectiveModel:
    """One propagator (H_NH - w_f)^-1 per field; H_g assumed perturbative."""
    _advise_perturbative_ground(part, jumps)
    h_nh = nh_hamiltonian(part.h_e, jumps)
    terms = []
    for label, omega, v_plus in _drives(part, fields):
        g = _propagator(h_nh, part, frequency=omega, field=label)
        terms.append(FieldTerm(label, omega, v_plus, g @ v_plus))
    return FieldEffectiveModel(Variant.FIELDS, tuple(terms), tuple(jumps), h_nh, part)


def effective_operators_general(part: Partition, jumps: Sequence[Jump],
                                fields: Sequence[FieldDrive]) -> FieldEffectiveModel:
    """Propagators (H_NH - E_l - w_f)^-1 for every field f and dressed ground state l."""
    h_nh = nh_hamiltonian(part.h_e, jumps)
    spaces = _dressed_states(part)
    terms = []
    for label, omega, v_plus in _drives(part, fields):
        a = np.zeros_like(h_nh)
        for space in spaces:
            g = _propagator(h_nh, part, energy=space.energy, frequency=omega, field=label)
            a += g @ v_plus @ space.projector
        terms.append(FieldTerm(label, omega, v_plus, a))
    return FieldEffectiveModel(Variant.GENERAL, tuple(terms), tuple(jumps), h_nh, part)


def derive(part: Partition, jumps: Sequence[Jump], variant: Variant,
           fields: Sequence[FieldDrive] = ()):
    """Dispatch on the variant name; fields are ignored by the static variants."""
    variant = Variant(variant)
    if variant is Variant.BASIC:
        return effective_operators_basic(part, jumps)
    if variant is Variant.DRESSED:
        return effective_operators_dressed(part, jumps)
    if variant is Variant.FIELDS:
        return effective_operators_fields(part, jumps, fields)
    return effective_operators_general(part, jumps, fields)


# ---------- derived quantities ----------

def _find_jump(jumps: Sequence[Jump], label: str) -> Jump:
    for j in jumps:
        if j.label == label:
            return j
    raise UnknownLabel(f"no jump operator labelled {label!r} (have {[j.label for j in jumps]})")


def _check_ground(part: Partition, *indices: int) -> None:
    for i in indices:
        if i not in part.ground_indices:
            raise InvalidParameter(f"index {i} is not a ground state (ground = {list(part.ground_indices)})")


def effective_rate(model: EffectiveModel, label: str, source: int, target: int) -> float:
    """|<target| L_eff^k |source>|^2"""
    _check_ground(model.partition, source, target)
    op = model.jump(label).op
    return float(abs(op[target, source]) ** 2)


def effective_nh_hamiltonian(model: EffectiveModel) -> np.ndarray:
    """No-jump Hamiltonian H_eff - (i/2) sum_k L_eff^k^dagger L_eff^k."""
    if model.variant not in (Variant.BASIC, Variant.DRESSED) or model.time is not None:
        raise VariantPreconditionFailed(
            f"the no-jump Hamiltonian needs a time-independent basic or dressed model, got {model.variant.value}"
        )
    h = model.h_eff - 0.5j * decay_operator(model.l_eff, model.dim)
    if model.variant is Variant.BASIC:
        residual = nh_identity_residual(model, h)
        if residual > IDENTITY_TOL:
            raise ConsistencyError(f"no-jump identity violated (relative residual {residual:.3g})", residual)
    h.setflags(write=False)
    return h


def nh_identity_residual(model: EffectiveModel, h_eff_nh: Optional[np.ndarray] = None) -> float:
    """Relative residual of H_eff,NH = -V_- H_NH^-1 V_+ + H_g (basic variant)."""
    part = model.partition
    if h_eff_nh is None:
        h_eff_nh = model.h_eff - 0.5j * decay_operator(model.l_eff, model.dim)
    g = _propagator(model.h_nh, part)
    rhs = -part.v_minus @ g @ part.v_plus + part.h_g
    return relative_residual(h_eff_nh, rhs)


def lindblad_sum_residual(model: EffectiveModel) -> float:
    """Relative residual of sum_k L_eff^dagger L_eff = -i V_- (H_NH^-1 - H_NH^-1^dagger) V_+ (basic variant)."""
    part = model.partition
    g = _propagator(model.h_nh, part)
    lhs = decay_operator(model.l_eff, model.dim)
    rhs = -1j * part.v_minus @ (g - adjoint(g)) @ part.v_plus
    return relative_residual(lhs, rhs)


def excited_propagator_elements(h_nh: np.ndarray,
                                excited_indices: Optional[Sequence[int]] = None) -> List[PropagatorElement]:
    """
    Effective complex detunings (diagonal) and couplings (off-diagonal) 1/<e_i|H_NH^-1|e_j>.

    Without explicit indices the excited block is taken to be the support of H_NH.
    """
    h_nh = np.asarray(h_nh, dtype=np.complex128)
    if excited_indices is None:
        support = (np.abs(h_nh).sum(axis=0) + np.abs(h_nh).sum(axis=1)) > 0.0
        excited_indices = [i for i in range(h_nh.shape[0]) if support[i]]
    idx = sorted(excited_indices)
    try:
        g = mat_inverse(h_nh, restricted_to=idx)
    except SingularMatrix as e:
        raise SingularPropagator(pivot_ratio=e.pivot_ratio) from e
    floor = 1e-14 * max_norm(g)
    rows = []
    for i in idx:
        for j in idx:
            p = complex(g[i, j])
            eff = 1.0 / p if abs(p) > floor else complex(np.inf, 0.0)
            rows.append(PropagatorElement(i, j, p, eff))
    return rows
