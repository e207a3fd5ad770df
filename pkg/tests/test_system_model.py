import logging

import numpy as np
import numpy.testing as npt
import pytest
from hypothesis import given, settings, strategies as st

from conftest import random_hermitian, random_spec, random_split
from errors import InvalidMatrix, InvalidParameter, InvalidSpec
from scenarios import two_level
from system_model import (
    FIELD_BLOCK, GROUND_SPLIT, HAMILTONIAN_HERMITIAN, JUMP_DIRECTION, UNIQUE_LABELS, WEAK_DRIVE,
    FieldDrive, SystemSpec, assemble_time_dependent_hamiltonian, excited_decay_widths, partition,
    static_drive_as_field, validate,
)


def two_level_spec(omega=0.1, delta=1.0, gamma=0.2, jump=None, fields=()):
    h = np.array([[0, omega / 2], [omega / 2, delta]], dtype=complex)
    if jump is None:
        jump = np.sqrt(gamma) * np.array([[0, 1], [0, 0]])
    return SystemSpec(dim=2, ground_indices=[0], hamiltonian=h, jumps=[("gamma", jump)], fields=fields)


# ---------- partition ----------

def test_partition_two_level_blocks():
    part = partition(two_level(0.1, 1.0, 0.2))
    npt.assert_array_equal(part.h_g, np.zeros((2, 2)))
    npt.assert_array_equal(part.h_e, np.diag([0, 1.0]))
    npt.assert_array_equal(part.v_plus, np.array([[0, 0], [0.05, 0]]))
    npt.assert_array_equal(part.v_minus, np.array([[0, 0.05], [0, 0]]))


def test_partition_couplings_are_exact_adjoints_for_nearly_hermitian_input():
    h = np.array([[0, 0.005], [0.005 + 5e-11j, 1.0]])
    spec = SystemSpec(dim=2, ground_indices=[0], hamiltonian=h,
                      jumps=[("gamma", np.sqrt(0.2) * np.array([[0, 1], [0, 0]]))])
    assert validate(spec).ok
    part = partition(spec)
    assert np.array_equal(part.v_minus, part.v_plus.conj().T)
    npt.assert_allclose(part.v_plus[1, 0], 0.005 + 2.5e-11j, rtol=0, atol=1e-18)


def test_partition_of_zero_hamiltonian():
    spec = SystemSpec(dim=2, ground_indices=[0], hamiltonian=np.zeros((2, 2)))
    part = partition(spec)
    for block in (part.h_g, part.h_e, part.v_plus, part.v_minus):
        assert not block.any()


def test_partition_matches_index_loop(rng):
    h = random_hermitian(rng, 5)
    spec = SystemSpec(dim=5, ground_indices=[0, 1], hamiltonian=h)
    part = partition(spec)
    ground = {0, 1}
    expected = {name: np.zeros((5, 5), dtype=complex) for name in ("h_g", "h_e", "v_plus", "v_minus")}
    for i in range(5):
        for j in range(5):
            key = {(True, True): "h_g", (False, False): "h_e",
                   (False, True): "v_plus", (True, False): "v_minus"}[(i in ground, j in ground)]
            expected[key][i, j] = h[i, j]
    for name, block in expected.items():
        assert np.array_equal(getattr(part, name), block), name


@given(seed=st.integers(0, 2**32 - 1))
@settings(max_examples=100, deadline=None)
def test_partition_reassembles_exactly(seed):
    rng = np.random.default_rng(seed)
    spec = random_spec(rng)
    part = partition(spec)
    assert np.array_equal(part.h_g + part.h_e + part.v_plus + part.v_minus, spec.hamiltonian)
    assert np.array_equal(part.v_minus, part.v_plus.conj().T)
    assert np.array_equal(part.p_g + part.p_e, np.eye(spec.dim))
    assert not (part.p_g @ part.p_e).any()


def test_partition_rejects_invalid_spec():
    spec = two_level_spec(jump=np.array([[0, 0], [1.0, 0]]))
    with pytest.raises(InvalidSpec) as e:
        partition(spec)
    assert JUMP_DIRECTION in e.value.report.invariants()


# ---------- validate ----------

def test_valid_two_level_has_empty_report():
    report = validate(two_level(0.1, 1.0, 0.2))
    assert report.ok
    assert report.violations == []
    assert report.advisories == []


def test_wrong_direction_jump_is_reported():
    report = validate(two_level_spec(jump=np.sqrt(0.2) * np.array([[0, 0], [1, 0]])))
    assert report.invariants() == [JUMP_DIRECTION]
    assert report.violations[0].label == "gamma"


def test_hermiticity_violation_residual_matches_perturbation():
    h = np.array([[0, 0.05], [0.05, 1.0]], dtype=complex)
    h[0, 1] += 1e-6
    spec = SystemSpec(dim=2, ground_indices=[0], hamiltonian=h,
                      jumps=[("gamma", np.sqrt(0.2) * np.array([[0, 1], [0, 0]]))])
    report = validate(spec)
    assert report.invariants() == [HAMILTONIAN_HERMITIAN]
    npt.assert_allclose(report.violations[0].residual, 1e-6, rtol=1e-9)


@pytest.mark.parametrize("ground", [[], [0, 1], [2], [0, 0]])
def test_ground_split_violations(ground):
    spec = SystemSpec(dim=2, ground_indices=ground, hamiltonian=np.eye(2))
    assert GROUND_SPLIT in validate(spec).invariants()


def test_duplicate_jump_labels_are_reported():
    op = np.array([[0, 1.0], [0, 0]])
    spec = SystemSpec(dim=2, ground_indices=[0], hamiltonian=np.eye(2), jumps=[("a", op), ("a", op)])
    assert validate(spec).invariants() == [UNIQUE_LABELS]


def test_field_outside_excitation_block_is_reported():
    bad = FieldDrive("probe", np.array([[0, 0.1], [0, 0]]), 0.5)
    report = validate(two_level_spec(fields=(bad,)))
    assert report.invariants() == [FIELD_BLOCK]


def test_strong_drive_gives_advisory_not_violation():
    report = validate(two_level(2.0, 1.0, 0.2))
    assert report.ok
    assert [a.name for a in report.advisories] == [WEAK_DRIVE]
    npt.assert_allclose(report.advisories[0].ratio, 1.0 / 0.2)


def test_advisories_are_logged_as_warnings(caplog):
    with caplog.at_level(logging.WARNING, logger="system_model"):
        validate(two_level(2.0, 1.0, 0.2))
    assert [r.levelno for r in caplog.records] == [logging.WARNING]
    assert WEAK_DRIVE in caplog.text
    caplog.clear()
    with caplog.at_level(logging.WARNING, logger="system_model"):
        validate(two_level(0.1, 1.0, 0.2))
    assert caplog.records == []


def test_no_decay_gives_infinite_advisory_ratio():
    spec = SystemSpec(dim=2, ground_indices=[0], hamiltonian=np.array([[0, 0.1], [0.1, 1.0]]))
    report = validate(spec)
    assert report.ok
    assert report.advisories[0].ratio == float("inf")


def test_excited_decay_widths():
    spec = SystemSpec(dim=3, ground_indices=[0], hamiltonian=np.zeros((3, 3)),
                      jumps=[("a", np.sqrt(0.3) * np.eye(3)[[0]].T @ np.eye(3)[[1]]),
                             ("b", np.sqrt(0.7) * np.eye(3)[[0]].T @ np.eye(3)[[2]])])
    npt.assert_allclose(excited_decay_widths(spec), [0.3, 0.7])


def test_spec_rejects_malformed_matrices():
    with pytest.raises(InvalidMatrix):
        SystemSpec(dim=2, ground_indices=[0], hamiltonian=[[0, 1, 2]])


# ---------- time-dependent assembly ----------

def test_assembly_without_fields_returns_hamiltonian():
    spec = two_level(0.1, 1.0, 0.2)
    for t in (0.0, 1.3, -7.0):
        assert np.array_equal(assemble_time_dependent_hamiltonian(spec, t), spec.hamiltonian)


def test_assembly_at_zero_adds_field_and_adjoint():
    v = np.array([[0, 0], [0.03, 0]])
    spec = two_level_spec(fields=(FieldDrive("probe", v, 0.7),))
    npt.assert_array_equal(assemble_time_dependent_hamiltonian(spec, 0.0), spec.hamiltonian + v + v.T)


def test_assembly_matches_scalar_phase():
    v = np.array([[0, 0], [0.03 + 0.01j, 0]])
    spec = two_level_spec(fields=(FieldDrive("probe", v, 2 * np.pi),))
    t = 0.25
    phase = np.cos(2 * np.pi * t) - 1j * np.sin(2 * np.pi * t)
    expected = np.array(spec.hamiltonian)
    expected[1, 0] += v[1, 0] * phase
    expected[0, 1] += np.conj(v[1, 0] * phase)
    npt.assert_allclose(assemble_time_dependent_hamiltonian(spec, t), expected, atol=1e-14)


@given(seed=st.integers(0, 2**32 - 1), t=st.floats(-100, 100))
@settings(max_examples=100, deadline=None)
def test_assembled_hamiltonian_is_hermitian(seed, t):
    rng = np.random.default_rng(seed)
    spec = random_spec(rng, max_dim=5)
    ground, excited = list(spec.ground_indices), list(spec.excited_indices)
    v = np.zeros((spec.dim, spec.dim), dtype=complex)
    v[np.ix_(excited, ground)] = rng.normal(size=(len(excited), len(ground))) * 0.02
    spec = SystemSpec(spec.dim, spec.ground_indices, spec.hamiltonian, spec.jumps,
                      fields=(FieldDrive("f", v, float(rng.uniform(-2, 2))),))
    h = assemble_time_dependent_hamiltonian(spec, t)
    assert np.max(np.abs(h - h.conj().T)) <= 1e-14


def test_static_drive_as_field_moves_coupling():
    spec = two_level(0.1, 1.0, 0.2)
    moved = static_drive_as_field(spec, omega=0.0)
    part = partition(moved)
    assert not part.v_plus.any()
    assert [f.label for f in moved.fields] == ["drive"]
    npt.assert_array_equal(assemble_time_dependent_hamiltonian(moved, 0.0), spec.hamiltonian)


def test_static_drive_as_field_refuses_duplicate_label():
    spec = static_drive_as_field(two_level(0.1, 1.0, 0.2))
    with pytest.raises(InvalidParameter):
        static_drive_as_field(spec)


def test_random_split_helper_is_proper(rng):
    for _ in range(20):
        ground, excited = random_split(rng, 4)
        assert ground and excited and sorted(ground + excited) == [0, 1, 2, 3]
