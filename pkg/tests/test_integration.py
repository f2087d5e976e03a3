"""
Integration tests for the SVIR toolkit command line.
"""
import json

import pytest

from app.models.parameters import REFERENCE_OPTIMUM
from main import main


@pytest.fixture(scope="module")
def workspace(tmp_path_factory):
    return tmp_path_factory.mktemp("svir")


def test_full_calibration_lifecycle(workspace, capsys):
    data = workspace / "cases.csv"

    # 1. Generate 43 days of active cases at the reference rates
    assert main(["synthesize", "--out", str(workspace), "--days", "43", "--data", str(data)]) == 0
    assert len(data.read_text().splitlines()) == 44

    # 2. Fit beta1, beta2 and m back from the default starting guess
    assert main(["fit", "--out", str(workspace), "--data", str(data)]) == 0
    result = json.loads((workspace / "fit_result.json").read_text())
    assert result["converged"]
    for name, truth in REFERENCE_OPTIMUM.items():
        assert result["parameters"][name] == pytest.approx(truth, rel=1e-2)
    assert "beta2 = " in capsys.readouterr().out

    # 3. Analyze the fitted parameter set
    fitted = [f"--param={name}={result['parameters'][name]!r}" for name in REFERENCE_OPTIMUM]
    assert main(["analyze", "--out", str(workspace), *fitted]) == 0
    bundle = json.loads((workspace / "analysis.json").read_text())
    numbers = bundle["reproduction_numbers"]
    assert numbers["r01"] == pytest.approx(0.36846, rel=2e-2)
    assert numbers["r02"] == pytest.approx(2.2317, rel=2e-2)
    assert bundle["stability"]["disease_free"]["classification"] == "Unstable"
    assert bundle["equilibria"]["endemic"]["state"]["I2"] > 0
    assert bundle["bifurcation"]["strain2"]["regime"] == "Forward"
    assert bundle["sensitivity"]["most_influential"]["r02"] == "vaccine_efficacy"
    assert bundle["failures"] == {}


def test_simulate_sweep_with_chart(workspace):
    out = workspace / "sweep"
    code = main(
        ["simulate", "--out", str(out), "--t-end", "100", "--sweep", "alpha=0,0.09", "--svg", "--output-step", "1"]
    )
    assert code == 0
    peaks = json.loads((out / "peaks.json").read_text())["peaks"]
    assert peaks["vaccination_rate=0.09"]["value_peak"] < peaks["vaccination_rate=0"]["value_peak"]
    assert (out / "chart.svg").stat().st_size > 0
