import json
import math
import os

import numpy as np
import pytest

from effective_ops import effective_operators_dressed
from scenarios import raman_three_level
from scripts.reproduce_figures import (
    FOUR_LEVEL_RATIOS, effective_rabi_period, main, run_engineered_decay_experiment,
    run_raman_coherent_experiment, run_raman_dissipative_experiment,
)
from system_model import partition


def test_rabi_period_of_the_coherent_raman_system():
    spec = raman_three_level(0.1, 0.1, 0.4995, 0.5005, 0.0, 0.0, allow_no_decay=True)
    model = effective_operators_dressed(partition(spec), spec.jumps)
    coupling = (0.01 / (4 * 0.4995) + 0.01 / (4 * 0.5005)) / 2
    detuning = np.real(model.h_eff[0, 0] - model.h_eff[1, 1])
    expected = 2 * math.pi / math.sqrt(detuning ** 2 + 4 * coupling ** 2)
    np.testing.assert_allclose(effective_rabi_period(model), expected, rtol=1e-9)


def test_nothing_to_run(tmp_path, capsys):
    assert main(["--out-dir", str(tmp_path), "--skip-four-level", "--skip-raman"]) == 0
    assert "Nothing to run" in capsys.readouterr().err


@pytest.mark.slow
def test_engineered_decay_agrees_for_weak_drive(tmp_path):
    results = run_engineered_decay_experiment(str(tmp_path), samples=500)
    runs = [results[f"four_level_omega_{r:g}gamma"] for r in FOUR_LEVEL_RATIOS]
    deviations = [r["max_population_deviation"] for r in runs]

    assert deviations[0] <= 0.02
    assert deviations[0] < deviations[2] < deviations[3]
    for r in runs:
        assert r["trace_drift"] <= 1e-6
        assert r["min_eigenvalue"] >= -1e-8
        np.testing.assert_allclose(r["t_end"] * r["kappa_eff"], 10.0)
    assert runs[0]["final_g2_full"] > 0.99
    assert os.path.exists(tmp_path / "four_level_omega_0.1gamma_full.csv")


@pytest.mark.slow
def test_coherent_raman_follows_effective_rabi_flop(tmp_path):
    result = run_raman_coherent_experiment(str(tmp_path))["raman_coherent"]
    assert result["max_population_deviation"] <= 0.05
    assert result["trace_drift"] <= 1e-6


@pytest.mark.slow
def test_dissipative_raman_agrees_and_relaxes_together(tmp_path):
    result = run_raman_dissipative_experiment(str(tmp_path))["raman_dissipative"]
    assert result["max_population_deviation"] <= 0.05
    assert result["steady_state_deviation"] <= 0.01
    assert result["steady_state_ok"]
    assert result["trace_drift"] <= 1e-6


@pytest.mark.slow
def test_reproduction_summary_file(tmp_path, capsys):
    assert main(["--out-dir", str(tmp_path), "--skip-four-level"]) == 0
    data = json.loads((tmp_path / "reproduction_results.json").read_text(encoding="utf-8"))
    assert {"raman_coherent", "raman_dissipative"} <= set(data["results"])
    assert "Full vs effective agreement" in capsys.readouterr().out
