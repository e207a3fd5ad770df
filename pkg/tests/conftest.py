import numpy as np
import pytest

from system_model import SystemSpec


def random_hermitian(rng, dim, scale=1.0):
    a = rng.normal(size=(dim, dim)) + 1j * rng.normal(size=(dim, dim))
    return scale * (a + a.conj().T) / 2


def random_split(rng, dim):
    n_ground = int(rng.integers(1, dim))
    perm = rng.permutation(dim)
    return sorted(int(i) for i in perm[:n_ground]), sorted(int(i) for i in perm[n_ground:])


def random_spec(rng, max_dim=8, drive=0.05, ground_scale=1.0, min_dim=2):
    """
    Valid random system: every excited state decays at a rate in [0.5, 2] to a
    random ground state, plus one dense excited -> ground jump. The decay
    widths keep H_NH - c invertible for every real shift c.
    """
    dim = int(rng.integers(min_dim, max_dim + 1))
    ground, excited = random_split(rng, dim)
    h = random_hermitian(rng, dim)
    pg = np.zeros(dim)
    pg[ground] = 1.0
    pe = 1.0 - pg
    h = (h * np.outer(pe, pe) + ground_scale * h * np.outer(pg, pg)
         + drive * h * (np.outer(pe, pg) + np.outer(pg, pe)))

    jumps = []
    for k, e in enumerate(excited):
        op = np.zeros((dim, dim), dtype=np.complex128)
        op[int(rng.choice(ground)), e] = np.sqrt(rng.uniform(0.5, 2.0))
        jumps.append((f"decay{k}", op))
    dense = (rng.normal(size=(dim, dim)) + 1j * rng.normal(size=(dim, dim))) * 0.3
    jumps.append(("dense", dense * np.outer(pg, pe)))
    return SystemSpec(dim=dim, ground_indices=ground, hamiltonian=h, jumps=jumps)


@pytest.fixture
def rng():
    return np.random.default_rng(20240611)
