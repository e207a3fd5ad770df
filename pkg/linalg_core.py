#!/usr/bin/env python3
"""
Dense complex linear algebra used by every other module.

A ComplexMatrix is a read-only, square, finite numpy complex128 array.
Operators carry angular-frequency units (hbar = 1); projectors and
density matrices are dimensionless. Systems here have dim <= ~10, so
everything stays dense.
"""

import warnings
from dataclasses import dataclass
from typing import Iterable, List, NamedTuple, Optional, Sequence

import numpy as np
import scipy.linalg as sla

from errors import DimensionMismatch, InvalidMatrix, NotHermitian, SingularMatrix


@dataclass(frozen=True)
class Tolerances:
    hermiticity: float = 1e-10      # relative to max |H_ij|
    degeneracy: float = 1e-9        # relative to max |H_ij|
    pivot: float = 1e-12            # smallest / largest LU pivot
    block_support: float = 1e-12    # absolute
    jump_direction: float = 1e-12   # absolute
    trace: float = 1e-8
    positivity: float = 1e-8


TOL = Tolerances()


class Eigenspace(NamedTuple):
    energy: float
    projector: np.ndarray


def _freeze(a: np.ndarray) -> np.ndarray:
    a.setflags(write=False)
    return a


def as_complex_matrix(entries, name: str = "matrix") -> np.ndarray:
    """Validate and copy `entries` into a read-only square complex matrix."""
    try:
        m = np.array(entries, dtype=np.complex128)
    except (TypeError, ValueError) as e:
        raise InvalidMatrix(f"{name}: not a numeric matrix ({e})") from e
    if m.ndim != 2 or m.shape[0] != m.shape[1]:
        raise InvalidMatrix(f"{name}: expected a square matrix, got shape {m.shape}")
    if m.shape[0] < 1:
        raise InvalidMatrix(f"{name}: dimension must be >= 1")
    if not np.all(np.isfinite(m)):
        raise InvalidMatrix(f"{name}: contains NaN or Inf entries")
    return _freeze(m)


def zeros(dim: int) -> np.ndarray:
    return _freeze(np.zeros((dim, dim), dtype=np.complex128))


def projector(dim: int, indices: Iterable[int]) -> np.ndarray:
    """Diagonal 0/1 projector onto the given basis indices."""
    p = np.zeros((dim, dim), dtype=np.complex128)
    for i in indices:
        p[i, i] = 1.0
    return _freeze(p)


def adjoint(m: np.ndarray) -> np.ndarray:
    return m.conj().T


def max_norm(m: np.ndarray) -> float:
    return float(np.max(np.abs(m))) if m.size else 0.0


def hermiticity_residual(m: np.ndarray) -> float:
    """max |M - M^dagger| over all entries."""
    return max_norm(m - adjoint(m))


def is_hermitian(m: np.ndarray, rel_tol: float = TOL.hermiticity) -> bool:
    return hermiticity_residual(m) <= rel_tol * max_norm(m)


def symmetrize(m: np.ndarray) -> np.ndarray:
    return 0.5 * (m + adjoint(m))


def relative_residual(a: np.ndarray, b: np.ndarray) -> float:
    """max |A - B| scaled by the larger of max |A|, max |B| (0 when both vanish)."""
    scale = max(max_norm(a), max_norm(b))
    if scale == 0.0:
        return 0.0
    return max_norm(np.asarray(a) - np.asarray(b)) / scale


def block_residual(m: np.ndarray, rows: Sequence[int], cols: Sequence[int]) -> float:
    """Largest entry of `m` outside the rows x cols block."""
    mask = np.ones(m.shape, dtype=bool)
    mask[np.ix_(list(rows), list(cols))] = False
    return float(np.max(np.abs(m[mask]))) if mask.any() else 0.0


def _check_same_dim(a: np.ndarray, b: np.ndarray) -> None:
    if a.shape != b.shape:
        raise DimensionMismatch(f"shapes {a.shape} and {b.shape} differ")


def mat_inverse(m: np.ndarray, restricted_to: Optional[Sequence[int]] = None,
                rel_tol: float = TOL.pivot) -> np.ndarray:
    """
    Invert `m` with pivoted LU, optionally only on the index block `restricted_to`.

    The result has the full dimension of `m` and is zero outside the block,
    so it composes with the other full-dimension operators as a plain product.
    """
    m = np.asarray(m, dtype=np.complex128)
    dim = m.shape[0]
    idx = list(range(dim)) if restricted_to is None else sorted(restricted_to)
    if not idx:
        raise InvalidMatrix("cannot invert on an empty index block")
    if restricted_to is not None:
        outside = block_residual(m, idx, idx)
        if outside > TOL.block_support:
            raise InvalidMatrix(
                f"matrix is not block-supported on {idx} (largest outside entry {outside:.3g})"
            )
    block = m[np.ix_(idx, idx)]

    with warnings.catch_warnings():
        warnings.simplefilter("ignore", sla.LinAlgWarning)
        lu, piv = sla.lu_factor(block, check_finite=True)
    pivots = np.abs(np.diag(lu))
    largest = float(pivots.max())
    ratio = float(pivots.min()) / largest if largest > 0.0 else 0.0
    if ratio < rel_tol:
        raise SingularMatrix(f"matrix is singular on block {idx} (pivot ratio {ratio:.3g})", pivot_ratio=ratio)

    inv_block = sla.lu_solve((lu, piv), np.eye(len(idx), dtype=np.complex128))
    out = np.zeros((dim, dim), dtype=np.complex128)
    out[np.ix_(idx, idx)] = inv_block
    return _freeze(out)


def hermitian_eigendecomposition(h: np.ndarray, restricted_to: Optional[Sequence[int]] = None,
                                 hermiticity_tol: float = TOL.hermiticity,
                                 degeneracy_tol: float = TOL.degeneracy) -> List[Eigenspace]:
    """
    Spectral decomposition H = sum_l E_l P_l, ascending in energy.

    Eigenvalues closer than degeneracy_tol * max|H_ij| share one projector.
    With `restricted_to`, only that block is decomposed and the projectors
    sum to the identity on it.
    """
    h = np.asarray(h, dtype=np.complex128)
    dim = h.shape[0]
    idx = list(range(dim)) if restricted_to is None else sorted(restricted_to)
    scale = max_norm(h)
    residual = hermiticity_residual(h)
    if residual > hermiticity_tol * scale:
        raise NotHermitian(f"matrix is not Hermitian (residual {residual:.3g})", residual=residual)
    block = symmetrize(h)[np.ix_(idx, idx)]

    energies, vectors = sla.eigh(block)
    merge_tol = degeneracy_tol * scale

    groups: List[List[int]] = []
    for k in range(len(energies)):
        if groups and energies[k] - energies[groups[-1][0]] <= merge_tol:
            groups[-1].append(k)
        else:
            groups.append([k])

    spaces = []
    for g in groups:
        vecs = vectors[:, g]
        p = np.zeros((dim, dim), dtype=np.complex128)
        p[np.ix_(idx, idx)] = vecs @ adjoint(vecs)
        spaces.append(Eigenspace(float(np.mean(energies[g])), _freeze(p)))
    return spaces


def frobenius_distance(a: np.ndarray, b: np.ndarray) -> float:
    a = np.asarray(a)
    b = np.asarray(b)
    _check_same_dim(a, b)
    return float(np.linalg.norm(a - b, "fro"))
