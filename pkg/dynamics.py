#!/usr/bin/env python3
"""
Integration of full and effective Lindblad master equations.

    d rho / dt = -i [H, rho] + sum_k L_k rho L_k^dagger - 1/2 {L_k^dagger L_k, rho}

Time-independent generators are propagated with the RK4 one-step
polynomial of the Liouvillian superoperator (row-major vectorization,
vec(A rho B) = (A kron B^T) vec(rho)); time-dependent ones with the
classical four-stage scheme, generator evaluated at t, t+dt/2 and t+dt.
Each step re-symmetrizes rho; the trace is never renormalized, so trace
drift stays visible as the integrator-quality signal.
"""

import logging
import math
import os
from dataclasses import dataclass
from enum import Enum
from typing import Callable, Dict, List, Optional, Sequence, Tuple, Union

import numpy as np
import scipy.linalg as sla
from scipy.ndimage import uniform_filter1d

from effective_ops import EffectiveModel, FieldEffectiveModel
from errors import DimensionMismatch, GridMismatch, InvalidParameter, InvalidState, StepTooLarge
from linalg_core import TOL, adjoint, hermiticity_residual, max_norm, symmetrize
from system_model import Jump, SystemSpec, hamiltonian_at, require_valid

logger = logging.getLogger(__name__)

DT_ENV_VAR = "ADIABATIC_ELIM_DT"
TRACE_DRIFT_LIMIT = 1e-6
POSITIVITY_LIMIT = 1e-6
STEP_SCALE = 0.01
FALLBACK_STEP = 0.01


class GeneratorTag(str, Enum):
    FULL = "full"
    EFFECTIVE = "effective"


@dataclass(frozen=True, eq=False)
class Generator:
    """H and jump operators of one master equation, static or as a function of t."""
    tag: GeneratorTag
    hamiltonian: np.ndarray                 # value at t = 0
    jumps: Tuple[Jump, ...]                 # value at t = 0
    ground_indices: Tuple[int, ...]
    evaluate: Optional[Callable[[float], Tuple[np.ndarray, Sequence[Jump]]]] = None
    frequencies: Tuple[float, ...] = ()
    variant: Optional[str] = None

    @property
    def dim(self) -> int:
        return self.hamiltonian.shape[0]

    @property
    def time_dependent(self) -> bool:
        return self.evaluate is not None

    def at(self, t: float) -> Tuple[np.ndarray, Sequence[Jump]]:
        if self.evaluate is None:
            return self.hamiltonian, self.jumps
        return self.evaluate(t)


def full_generator(spec: SystemSpec) -> Generator:
    require_valid(spec)
    evaluate = None
    if spec.fields:
        def evaluate(t, _spec=spec):
            return hamiltonian_at(_spec, t), _spec.jumps
    return Generator(GeneratorTag.FULL, hamiltonian_at(spec, 0.0), spec.jumps, spec.ground_indices,
                     evaluate=evaluate, frequencies=tuple(f.omega for f in spec.fields))


def effective_generator(model: Union[EffectiveModel, FieldEffectiveModel]) -> Generator:
    if isinstance(model, FieldEffectiveModel):
        snapshot = model.at(0.0)
        evaluate = None
        if not model.time_independent:
            def evaluate(t, _model=model):
                m = _model.at(t)
                return m.h_eff, m.l_eff
        return Generator(GeneratorTag.EFFECTIVE, snapshot.h_eff, snapshot.l_eff, model.ground_indices,
                         evaluate=evaluate, frequencies=tuple(model.frequencies),
                         variant=model.variant.value)
    return Generator(GeneratorTag.EFFECTIVE, model.h_eff, model.l_eff, model.ground_indices,
                     variant=model.variant.value)


def as_generator(source) -> Generator:
    if isinstance(source, Generator):
        return source
    if isinstance(source, SystemSpec):
        return full_generator(source)
    if isinstance(source, (EffectiveModel, FieldEffectiveModel)):
        return effective_generator(source)
    raise TypeError(f"cannot build a master-equation generator from {type(source).__name__}")


# ---------- right-hand side ----------

def _check_dims(h: np.ndarray, jumps: Sequence[Jump], rho: np.ndarray) -> None:
    dim = h.shape[0]
    shapes = [rho.shape] + [j.op.shape for j in jumps]
    for shape in shapes:
        if shape != (dim, dim):
            raise DimensionMismatch(f"operator of shape {shape} does not match dimension {dim}")


def lindblad_rhs(h: np.ndarray, jumps: Sequence[Jump], rho: np.ndarray) -> np.ndarray:
    rho = np.asarray(rho, dtype=np.complex128)
    _check_dims(h, jumps, rho)
    out = -1j * (h @ rho - rho @ h)
    for j in jumps:
        ld = adjoint(j.op)
        ldl = ld @ j.op
        out += j.op @ rho @ ld - 0.5 * (ldl @ rho + rho @ ldl)
    return out


def lindblad_superoperator(h: np.ndarray, jumps: Sequence[Jump]) -> np.ndarray:
    """Liouvillian as a dim^2 x dim^2 matrix acting on row-major vec(rho)."""
    dim = h.shape[0]
    eye = np.eye(dim, dtype=np.complex128)
    sup = -1j * (np.kron(h, eye) - np.kron(eye, h.T))
    for j in jumps:
        ldl = adjoint(j.op) @ j.op
        sup += np.kron(j.op, j.op.conj()) - 0.5 * (np.kron(ldl, eye) + np.kron(eye, ldl.T))
    return sup


def _rk4_propagator(sup: np.ndarray, dt: float) -> np.ndarray:
    """I + hL + (hL)^2/2 + (hL)^3/6 + (hL)^4/24"""
    a = dt * sup
    out = np.eye(sup.shape[0], dtype=np.complex128)
    term = out
    for k in range(1, 5):
        term = term @ a / k
        out = out + term
    return out


def _rk4_step(gen: Generator, t: float, rho: np.ndarray, dt: float) -> np.ndarray:
    def f(s, r):
        h, jumps = gen.at(s)
        return lindblad_rhs(h, jumps, r)

    k1 = f(t, rho)
    k2 = f(t + 0.5 * dt, rho + 0.5 * dt * k1)
    k3 = f(t + 0.5 * dt, rho + 0.5 * dt * k2)
    k4 = f(t + dt, rho + dt * k3)
    return rho + dt / 6.0 * (k1 + 2.0 * k2 + 2.0 * k3 + k4)


# ---------- states ----------

def pure_state(dim: int, index: int) -> np.ndarray:
    if not 0 <= index < dim:
        raise InvalidState(f"basis index {index} outside 0..{dim - 1}")
    rho = np.zeros((dim, dim), dtype=np.complex128)
    rho[index, index] = 1.0
    rho.setflags(write=False)
    return rho


def density_matrix(mat) -> np.ndarray:
    """Validate a density matrix: Hermitian, unit trace, positive within tolerance."""
    rho = np.array(mat, dtype=np.complex128)
    if rho.ndim != 2 or rho.shape[0] != rho.shape[1] or rho.shape[0] < 1:
        raise InvalidState(f"density matrix must be square, got shape {rho.shape}")
    if not np.all(np.isfinite(rho)):
        raise InvalidState("density matrix contains NaN or Inf entries")
    residual = hermiticity_residual(rho)
    if residual > TOL.hermiticity:
        raise InvalidState(f"density matrix is not Hermitian (residual {residual:.3g})")
    rho = symmetrize(rho)
    trace = float(np.real(np.trace(rho)))
    if abs(trace - 1.0) > TOL.trace:
        raise InvalidState(f"density matrix trace is {trace:.12g}, expected 1")
    lowest = float(sla.eigvalsh(rho)[0])
    if lowest < -TOL.positivity:
        raise InvalidState(f"density matrix has negative eigenvalue {lowest:.3g}")
    rho.setflags(write=False)
    return rho


# ---------- step size ----------

def default_step(source) -> float:
    """min(0.01 / gamma_max, 0.01 / |H|_max); drive frequencies count towards |H|."""
    gen = as_generator(source)
    rates = [float(np.linalg.norm(j.op, 2)) ** 2 for j in gen.jumps]
    gamma_max = max(rates, default=0.0)
    scale = max_norm(gen.hamiltonian)
    if gen.time_dependent:
        scale = max([scale] + [abs(w) for w in gen.frequencies])
    candidates = [STEP_SCALE / x for x in (gamma_max, scale) if x > 0.0]
    return min(candidates) if candidates else FALLBACK_STEP


def resolve_step(source, dt: Optional[float] = None) -> float:
    """Explicit dt, then the ADIABATIC_ELIM_DT environment variable, then default_step."""
    if dt is None:
        raw = os.environ.get(DT_ENV_VAR)
        if raw:
            try:
                dt = float(raw)
            except ValueError:
                raise InvalidParameter(f"{DT_ENV_VAR}={raw!r} is not a number")
            logger.debug("step size %.6g taken from %s", dt, DT_ENV_VAR)
    if dt is None:
        return default_step(source)
    if not (dt > 0.0 and math.isfinite(dt)):
        raise InvalidParameter(f"step size must be positive and finite, got {dt}")
    return float(dt)


# ---------- trajectories ----------

@dataclass(frozen=True, eq=False)
class Trajectory:
    times: np.ndarray               # (n,)
    states: np.ndarray              # (n, dim, dim)
    populations: np.ndarray         # (n, dim)
    generator_tag: GeneratorTag
    ground_indices: Tuple[int, ...]
    trace_drift: float              # max |tr rho - 1| over every step
    min_eigenvalue: float           # over every step
    dt: float

    @property
    def dim(self) -> int:
        return self.populations.shape[1]

    @property
    def traces(self) -> np.ndarray:
        return self.populations.sum(axis=1)

    @property
    def excited_indices(self) -> Tuple[int, ...]:
        ground = set(self.ground_indices)
        return tuple(i for i in range(self.dim) if i not in ground)

    def final_state(self) -> np.ndarray:
        return self.states[-1]


def integrate(source, rho0, t_end: float, dt: Optional[float] = None, sample_every: int = 1) -> Trajectory:
    """
    Fixed-step RK4 from t = 0 to t_end.

    The step is shrunk slightly so that a whole number of steps lands on
    t_end; every `sample_every`-th step and the final one are recorded.
    """
    gen = as_generator(source)
    rho = np.array(density_matrix(rho0))
    if rho.shape != (gen.dim, gen.dim):
        raise DimensionMismatch(f"initial state of shape {rho.shape} for a dimension-{gen.dim} system")
    if not (t_end >= 0.0 and math.isfinite(t_end)):
        raise InvalidParameter(f"t_end must be nonnegative and finite, got {t_end}")
    if sample_every < 1:
        raise InvalidParameter(f"sample_every must be >= 1, got {sample_every}")
    dt = resolve_step(gen, dt)
    n_steps = int(math.ceil(t_end / dt - 1e-9)) if t_end > 0.0 else 0
    step = t_end / n_steps if n_steps else dt
    dim = gen.dim

    logger.debug("integrating %s generator: %d steps of %.6g up to t=%.6g%s", gen.tag.value, n_steps, step,
                 t_end, " (time-dependent)" if gen.time_dependent else "")

    propagator = None
    if not gen.time_dependent:
        propagator = _rk4_propagator(lindblad_superoperator(gen.hamiltonian, gen.jumps), step)

    times: List[float] = [0.0]
    states: List[np.ndarray] = [rho.copy()]
    drift = abs(float(np.real(np.trace(rho))) - 1.0)
    lowest = float(np.linalg.eigvalsh(rho)[0])
    report_every = max(1, n_steps // 10)

    for k in range(1, n_steps + 1):
        t = (k - 1) * step
        if propagator is not None:
            rho = (propagator @ rho.reshape(-1)).reshape(dim, dim)
        else:
            rho = _rk4_step(gen, t, rho, step)
        rho = symmetrize(rho)

        trace = np.real(np.trace(rho))
        if not np.all(np.isfinite(rho)):
            raise StepTooLarge(float("inf"), step, step / 2.0)
        drift = max(drift, abs(float(trace) - 1.0))
        if drift > TRACE_DRIFT_LIMIT:
            raise StepTooLarge(drift, step, step / 2.0)
        # RK4 conserves the trace exactly, so an unstable step shows up here first
        lowest = min(lowest, float(np.linalg.eigvalsh(rho)[0]))
        if lowest < -POSITIVITY_LIMIT:
            raise StepTooLarge(-lowest, step, step / 2.0, quantity="negativity")

        if k % sample_every == 0 or k == n_steps:
            times.append(k * step)
            states.append(rho.copy())
        if k % report_every == 0:
            logger.debug("step %d/%d t=%.6g trace drift %.3g min eigenvalue %.3g",
                         k, n_steps, k * step, drift, lowest)

    stacked = np.array(states)
    populations = np.real(np.diagonal(stacked, axis1=1, axis2=2)).copy()
    return Trajectory(np.array(times), stacked, populations, gen.tag, gen.ground_indices,
                      drift, lowest, step)


# ---------- comparison ----------

@dataclass(frozen=True)
class ComparisonMetrics:
    max_population_deviation: float
    final_trace_distance: float
    per_state_deviation: Tuple[float, ...]   # over ground indices, in order
    leakage: float                           # largest excited population of a full trajectory
    ground_indices: Tuple[int, ...]

    def as_dict(self) -> Dict[str, float]:
        out = {
            "max_population_deviation": self.max_population_deviation,
            "final_trace_distance": self.final_trace_distance,
            "leakage": self.leakage,
        }
        for i, dev in zip(self.ground_indices, self.per_state_deviation):
            out[f"deviation_{i}"] = dev
        return out


def trace_distance(a: np.ndarray, b: np.ndarray) -> float:
    """1/2 sum of singular values of a - b."""
    a = np.asarray(a)
    b = np.asarray(b)
    if a.shape != b.shape:
        raise DimensionMismatch(f"shapes {a.shape} and {b.shape} differ")
    return 0.5 * float(np.sum(sla.svdvals(a - b)))


def _leakage(traj: Trajectory) -> float:
    if traj.generator_tag is not GeneratorTag.FULL or not traj.excited_indices:
        return 0.0
    return float(traj.populations[:, list(traj.excited_indices)].sum(axis=1).max())


def compare(a: Trajectory, b: Trajectory) -> ComparisonMetrics:
    """Population agreement on the ground block of two trajectories sampled on the same grid."""
    if a.dim != b.dim:
        raise DimensionMismatch(f"trajectories have dimensions {a.dim} and {b.dim}")
    if a.times.shape != b.times.shape:
        raise GridMismatch(f"time grids have {a.times.size} and {b.times.size} samples")
    span = max(float(np.abs(a.times).max()), 1.0)
    if not np.allclose(a.times, b.times, rtol=0.0, atol=1e-9 * span):
        raise GridMismatch("time grids differ; resample both runs onto one grid first")
    ground = list(a.ground_indices)
    diff = np.abs(a.populations[:, ground] - b.populations[:, ground])
    per_state = tuple(float(x) for x in diff.max(axis=0))
    return ComparisonMetrics(
        max_population_deviation=max(per_state, default=0.0),
        final_trace_distance=trace_distance(a.final_state(), b.final_state()),
        per_state_deviation=per_state,
        leakage=max(_leakage(a), _leakage(b)),
        ground_indices=tuple(ground),
    )


def running_average(traj: Trajectory, window_time: float) -> np.ndarray:
    """Populations smoothed by a moving average spanning `window_time`."""
    if traj.times.size < 2:
        return traj.populations.copy()
    spacing = float(traj.times[1] - traj.times[0])
    size = max(1, int(round(window_time / spacing)))
    return uniform_filter1d(traj.populations, size=size, axis=0, mode="nearest")
