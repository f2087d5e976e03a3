"""
Tests for the svir command line: exit codes, config precedence and outputs.
"""
import json

import pytest

from app.cli import run
from app.models.parameters import DEFAULT_PARAMETERS


def read_json(path):
    return json.loads(path.read_text(encoding="utf-8"))


def test_no_command_prints_help_and_fails(capsys):
    assert run([]) == 2
    assert "COMMAND" in capsys.readouterr().out


def test_help_lists_defaults(capsys):
    with pytest.raises(SystemExit) as excinfo:
        run(["simulate", "--help"])
    assert excinfo.value.code == 0
    out = capsys.readouterr().out
    assert "birth_rate (B)=2993" in out
    assert "vaccine_efficacy (sigma)=0.9" in out
    assert "I1=269725" in out


def test_unknown_flag_is_usage_error(capsys):
    assert run(["simulate", "--no-such-flag"]) == 2
    assert "usage" in capsys.readouterr().err


def test_unknown_parameter_is_usage_error(tmp_path, capsys):
    assert run(["simulate", "--out", str(tmp_path), "--param", "gamma=1"]) == 2
    assert "unknown parameter 'gamma'" in capsys.readouterr().err


def test_out_of_range_parameter_is_usage_error(tmp_path):
    assert run(["sensitivity", "--out", str(tmp_path), "--param", "sigma=1.5"]) == 2


def test_non_numeric_override_is_usage_error(tmp_path):
    assert run(["sensitivity", "--out", str(tmp_path), "--param", "beta1=fast"]) == 2


def test_simulate_writes_trajectory_and_peaks(tmp_path):
    assert run(["simulate", "--out", str(tmp_path), "--t-end", "5"]) == 0
    lines = (tmp_path / "trajectory.csv").read_text().splitlines()
    assert lines[0] == "t,S,V,I1,I2,R"
    assert len(lines) == 12
    peaks = read_json(tmp_path / "peaks.json")
    assert peaks["column"] == "I2"
    assert set(peaks["peaks"]) == {"baseline"}


def test_sweep_file_names(tmp_path):
    code = run(["simulate", "--out", str(tmp_path), "--t-end", "2", "--sweep", "sigma=0,0.7", "--column", "I1"])
    assert code == 0
    assert (tmp_path / "trajectory_vaccine_efficacy_0.csv").exists()
    assert (tmp_path / "trajectory_vaccine_efficacy_0.7.csv").exists()
    assert not (tmp_path / "trajectory.csv").exists()
    peaks = read_json(tmp_path / "peaks.json")
    assert peaks["column"] == "I1"
    assert list(peaks["peaks"]) == ["vaccine_efficacy=0", "vaccine_efficacy=0.7"]


def test_malformed_sweep_is_usage_error(tmp_path):
    assert run(["simulate", "--out", str(tmp_path), "--sweep", "sigma=0,x"]) == 2


def test_svg_output_is_byte_identical(tmp_path):
    first, second = tmp_path / "a", tmp_path / "b"
    for out in (first, second):
        assert run(["simulate", "--out", str(out), "--t-end", "10", "--svg", "--log-y"]) == 0
    content = (first / "chart.svg").read_bytes()
    assert content.startswith(b"<?xml")
    assert content == (second / "chart.svg").read_bytes()


def test_config_file_then_flags(tmp_path):
    config = tmp_path / "run.json"
    config.write_text(
        json.dumps(
            {
                "parameters": {"sigma": 0.5, "vaccine_waning": 0.02},
                "integrator": {"t_end": 3.0, "output_step": 1.0},
                "out": str(tmp_path / "from_file"),
            }
        )
    )
    out = tmp_path / "from_flags"
    assert run(["sensitivity", "--config", str(config), "--param", "mu=0.01", "--out", str(out)]) == 0
    assert not (tmp_path / "from_file").exists()
    entries = {e["parameter"]: e for e in read_json(out / "sensitivity.json")["entries"]}
    assert entries["vaccine_efficacy"]["value_used"] == 0.5
    assert entries["vaccine_waning"]["value_used"] == 0.01
    assert entries["beta1"]["value_used"] == DEFAULT_PARAMETERS.beta1

    assert run(["simulate", "--config", str(config), "--t-end", "2", "--out", str(out)]) == 0
    rows = (out / "trajectory.csv").read_text().splitlines()
    assert [float(row.split(",")[0]) for row in rows[1:]] == [0.0, 1.0, 2.0]


def test_broken_config_file_is_usage_error(tmp_path, capsys):
    config = tmp_path / "run.json"
    config.write_text("{not json")
    assert run(["sensitivity", "--config", str(config), "--out", str(tmp_path)]) == 2
    assert "not valid JSON" in capsys.readouterr().err
    assert run(["sensitivity", "--config", str(tmp_path / "missing.json")]) == 2


def test_sensitivity_csv_header(tmp_path):
    assert run(["sensitivity", "--out", str(tmp_path)]) == 0
    lines = (tmp_path / "sensitivity.csv").read_text().splitlines()
    assert lines[0] == "parameter,value,index_r01,index_r02"
    assert len(lines) == 14


def test_bifurcation_single_strain(tmp_path):
    assert run(["bifurcation", "--out", str(tmp_path), "--strain", "2"]) == 0
    document = read_json(tmp_path / "bifurcation.json")
    assert list(document) == ["strain2"]
    assert document["strain2"]["regime"] == "Forward"


def test_analyze_subcritical_reports_stable_disease_free_state(tmp_path):
    beta2 = 0.3 * DEFAULT_PARAMETERS.beta2
    assert run(["analyze", "--out", str(tmp_path), "--param", f"beta2={beta2!r}"]) == 0
    bundle = read_json(tmp_path / "analysis.json")
    assert bundle["stability"]["disease_free"]["classification"] == "LocallyAsymptoticallyStable"
    assert bundle["equilibria"]["endemic"] is None
    assert "endemic_note" in bundle["equilibria"]
    assert bundle["failures"] == {}


def test_analyze_records_failed_sections(tmp_path):
    # R01 = 0 leaves the sensitivity indices undefined
    assert run(["analyze", "--out", str(tmp_path), "--param", "beta1=0"]) == 1
    bundle = read_json(tmp_path / "analysis.json")
    assert "sensitivity" in bundle["failures"]
    assert bundle["sensitivity"] is None
    assert bundle["reproduction_numbers"]["r01"] == 0.0


def test_equilibria_without_endemic_state(tmp_path):
    beta2 = 0.3 * DEFAULT_PARAMETERS.beta2
    assert run(["equilibria", "--out", str(tmp_path), "--param", f"beta2={beta2!r}"]) == 0
    document = read_json(tmp_path / "equilibria.json")
    assert document["endemic"] is None
    assert document["disease_free_stability"]["classification"] == "LocallyAsymptoticallyStable"


def test_fit_requires_data(tmp_path, capsys):
    assert run(["fit", "--out", str(tmp_path)]) == 2
    assert "--data" in capsys.readouterr().err


def test_fit_with_malformed_csv_names_line(tmp_path, capsys):
    data = tmp_path / "cases.csv"
    data.write_text("day,observed\n0,100\n1,abc\n")
    assert run(["fit", "--out", str(tmp_path), "--data", str(data)]) == 2
    assert "line 3" in capsys.readouterr().err


def test_fit_with_missing_file_is_usage_error(tmp_path):
    assert run(["fit", "--out", str(tmp_path), "--data", str(tmp_path / "absent.csv")]) == 2


def test_synthesize_then_fit_without_free_parameters(tmp_path):
    data = tmp_path / "cases.csv"
    assert run(["synthesize", "--out", str(tmp_path), "--days", "5", "--data", str(data)]) == 0
    assert data.read_text().splitlines()[0] == "day,observed"
    assert run(["fit", "--out", str(tmp_path), "--data", str(data), "--free", ""]) == 0
    result = read_json(tmp_path / "fit_result.json")
    assert result["evaluations"] == 1
    assert result["objective"] == pytest.approx(result["initial_objective"])
    assert (tmp_path / "fit_comparison.csv").read_text().splitlines()[0] == "day,observed,predicted"
