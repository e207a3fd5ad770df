import csv
import json

import numpy as np
import pytest

from adiabatic_elimination import EXIT_INTEGRATION, EXIT_INVALID, EXIT_OK, EXIT_PARSE, main, parse_params
from errors import InvalidParameter
from scenarios import PRESETS, two_level
from spec_document import dump, dumps, load, to_dict
from system_model import HAMILTONIAN_HERMITIAN, JUMP_DIRECTION


def write_doc(path, doc):
    path.write_text(json.dumps(doc), encoding="utf-8")
    return str(path)


def test_parse_params():
    assert parse_params(["omega=0.05", " gamma = 0.2 "]) == {"omega": "0.05", "gamma": "0.2"}
    with pytest.raises(InvalidParameter):
        parse_params(["omega"])


# ---------- preset / validate ----------

def test_preset_list(capsys):
    assert main(["preset", "list"]) == EXIT_OK
    out = capsys.readouterr().out
    for name in PRESETS:
        assert name in out


def test_exported_preset_validates(tmp_path, capsys):
    path = str(tmp_path / "four_level.json")
    assert main(["preset", "export", "four-level", "--out", path]) == EXIT_OK
    assert main(["validate", path]) == EXIT_OK
    assert "[validate] OK" in capsys.readouterr().out
    assert load(path).metadata["preset"] == "four-level"


def test_export_is_bit_identical_on_reexport(tmp_path):
    first, second = tmp_path / "a.json", tmp_path / "b.json"
    assert main(["preset", "export", "raman", "-p", "omega0=0.0333", "--out", str(first)]) == EXIT_OK
    doc = load(str(first))
    dump(doc.spec, str(second), doc.metadata)
    assert first.read_bytes() == second.read_bytes()


def test_wrong_direction_jump_fails_validation(tmp_path, capsys):
    doc = to_dict(two_level(0.1, 1.0, 0.2))
    doc["jumps"][0]["matrix"] = [[[0, 0], [0, 0]], [[0.447, 0], [0, 0]]]
    assert main(["validate", write_doc(tmp_path / "bad.json", doc)]) == EXIT_INVALID
    out = capsys.readouterr().out
    assert JUMP_DIRECTION in out and "[validate] 1 violation(s)" in out


def test_hermiticity_residual_is_printed(tmp_path, capsys):
    doc = to_dict(two_level(0.1, 1.0, 0.2))
    doc["hamiltonian"][0][1] = [0.05 + 1e-6, 0.0]
    assert main(["validate", write_doc(tmp_path / "bad.json", doc)]) == EXIT_INVALID
    out = capsys.readouterr().out
    assert HAMILTONIAN_HERMITIAN in out and "residual 1e-06" in out


def test_strong_drive_prints_advisory_and_passes(capsys):
    assert main(["validate", "--preset", "two-level", "-p", "omega=2"]) == EXIT_OK
    assert "[validate] advisory weak-drive" in capsys.readouterr().out


def test_malformed_json_is_a_parse_error(tmp_path, capsys):
    path = tmp_path / "broken.json"
    path.write_text('{"dimension": 2, "ground_indices": [0]', encoding="utf-8")
    assert main(["validate", str(path)]) == EXIT_PARSE
    assert "parse error" in capsys.readouterr().err


def test_missing_file_is_a_parse_error(tmp_path):
    assert main(["validate", str(tmp_path / "nowhere.json")]) == EXIT_PARSE


@pytest.mark.parametrize("argv", [
    ["validate", "doc.json", "--preset", "two-level"],
    ["validate", "--preset", "two-level", "-p", "Omega=1"],
    ["validate", "--preset", "two-level", "-p", "omega"],
])
def test_bad_input_arguments(argv):
    assert main(argv) == EXIT_INVALID


def test_no_input_is_a_parse_error():
    assert main(["validate"]) == EXIT_PARSE


# ---------- derive ----------

def test_derive_two_level(capsys):
    assert main(["derive", "--preset", "two-level"]) == EXIT_OK
    out = capsys.readouterr().out
    assert "-0.00247525" in out
    assert "rate gamma:0->0" in out
    assert "no-jump identity residual" in out
    assert "no-jump Hamiltonian" in out


def test_derive_four_level_prints_small_identity_residuals(capsys):
    assert main(["derive", "--preset", "four-level"]) == EXIT_OK
    lines = [line for line in capsys.readouterr().out.splitlines() if "identity residual " in line]
    assert len(lines) == 2
    for line in lines:
        assert float(line.rsplit(" ", 1)[1]) <= 1e-10


def test_derive_compares_variants(capsys, tmp_path):
    out_path = tmp_path / "raman.json"
    assert main(["derive", "--preset", "raman", "--variant", "basic", "--variant", "dressed",
                 "--out", str(out_path)]) == EXIT_OK
    out = capsys.readouterr().out
    assert "|H_eff(basic) - H_eff(dressed)|_F" in out
    data = json.loads(out_path.read_text(encoding="utf-8"))
    assert set(data["models"]) == {"basic", "dressed"}
    assert data["metadata"]["preset"] == "raman"
    assert "nh_identity_residual" in data["models"]["basic"]


def test_derive_fields_blocks_and_snapshot(capsys):
    assert main(["derive", "--preset", "raman-fields"]) == EXIT_OK
    out = capsys.readouterr().out
    assert "A[omega0] at omega=-0.495" in out
    assert "time-averaged rate gamma1:0->1" in out
    assert main(["derive", "--preset", "raman-fields", "--t", "10"]) == EXIT_OK
    assert "variant fields at t=10" in capsys.readouterr().out


def test_derive_singular_propagator_fails(capsys):
    argv = ["derive", "--preset", "raman", "-p", "gamma0=0", "-p", "gamma1=0", "-p", "allow_no_decay=true",
            "--variant", "basic", "-p", "Delta0=0", "-p", "Delta1=0"]
    assert main(argv) == EXIT_INVALID
    assert "SingularPropagator" in capsys.readouterr().err


def test_derive_bad_metadata_variant(tmp_path):
    doc = to_dict(two_level(0.1, 1.0, 0.2), {"variant": "fancy"})
    assert main(["derive", write_doc(tmp_path / "doc.json", doc)]) == EXIT_PARSE


# ---------- simulate / compare ----------

def test_simulate_writes_csv(tmp_path, capsys):
    path = tmp_path / "traj.csv"
    argv = ["simulate", "--preset", "two-level", "--t-end", "10", "--dt", "0.05",
            "--sample-every", "20", "--out", str(path)]
    assert main(argv) == EXIT_OK
    with open(path, newline="", encoding="utf-8") as f:
        rows = list(csv.reader(f))
    assert rows[0] == ["t", "pop_0", "pop_1", "trace"]
    assert len(rows) == 1 + 11
    values = np.array(rows[1:], dtype=float)
    assert values.shape[1] == 2 + 2
    assert np.all(np.diff(values[:, 0]) > 0)
    np.testing.assert_allclose(values[:, 3], 1.0, atol=1e-9)
    np.testing.assert_allclose(values[-1, 0], 10.0)
    assert "[simulate] full" in capsys.readouterr().out


def test_simulate_effective_generator(tmp_path):
    path = tmp_path / "eff.csv"
    argv = ["simulate", "--preset", "two-level", "--generator", "effective:basic", "--t-end", "5",
            "--dt", "0.1", "--out", str(path)]
    assert main(argv) == EXIT_OK
    values = np.loadtxt(path, delimiter=",", skiprows=1)
    np.testing.assert_allclose(values[:, 1], 1.0, atol=1e-12)


def test_simulate_rejects_unknown_generator(tmp_path):
    argv = ["simulate", "--preset", "two-level", "--generator", "partial", "--t-end", "1",
            "--out", str(tmp_path / "x.csv")]
    assert main(argv) == EXIT_INVALID


def test_simulate_step_too_large(tmp_path, capsys):
    argv = ["simulate", "--preset", "two-level", "-p", "gamma=1", "--t-end", "2000", "--dt", "10",
            "--out", str(tmp_path / "x.csv")]
    assert main(argv) == EXIT_INTEGRATION
    assert "try dt=5" in capsys.readouterr().err


def test_simulate_unstable_step_fails_without_writing(tmp_path, capsys):
    doc_path = tmp_path / "decay.json"
    doc_path.write_text(dumps(two_level(0.0, 1.0, 1.0), {"initial_index": 1}), encoding="utf-8")
    out = tmp_path / "x.csv"
    argv = ["simulate", str(doc_path), "--t-end", "29", "--dt", "2.9", "--out", str(out)]
    assert main(argv) == EXIT_INTEGRATION
    assert "negativity" in capsys.readouterr().err
    assert not out.exists()


def test_simulate_uses_environment_step(tmp_path, monkeypatch):
    monkeypatch.setenv("ADIABATIC_ELIM_DT", "0.5")
    path = tmp_path / "env.csv"
    assert main(["simulate", "--preset", "two-level", "--t-end", "2", "--out", str(path)]) == EXIT_OK
    values = np.loadtxt(path, delimiter=",", skiprows=1)
    np.testing.assert_allclose(values[:, 0], [0.0, 0.5, 1.0, 1.5, 2.0])


def test_compare_writes_metrics(tmp_path, capsys):
    path = tmp_path / "cmp.json"
    argv = ["compare", "--preset", "two-level", "--t-end", "50", "--dt", "0.05", "--sample-every", "10",
            "--out", str(path)]
    assert main(argv) == EXIT_OK
    data = json.loads(path.read_text(encoding="utf-8"))
    assert data["agree"] is True
    assert data["variant"] == "basic"
    assert data["samples"] == 101
    assert 0.0 < data["max_population_deviation"] < 0.02
    assert data["max_population_deviation"] == data["deviation_0"]
    assert "[compare] full vs effective (basic)" in capsys.readouterr().out


def test_document_input_matches_preset(tmp_path):
    doc_path = tmp_path / "two.json"
    doc_path.write_text(dumps(two_level(0.1, 1.0, 0.2), {"initial_index": 0}), encoding="utf-8")
    a, b = tmp_path / "a.csv", tmp_path / "b.csv"
    common = ["--t-end", "5", "--dt", "0.1"]
    assert main(["simulate", str(doc_path), *common, "--out", str(a)]) == EXIT_OK
    assert main(["simulate", "--preset", "two-level", *common, "--out", str(b)]) == EXIT_OK
    assert a.read_bytes() == b.read_bytes()


def test_verbose_flag(capsys):
    assert main(["-v", "validate", "--preset", "two-level"]) == EXIT_OK
