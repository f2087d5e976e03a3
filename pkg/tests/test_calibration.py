"""
Tests for the least-squares calibration and case-series handling.
"""
import numpy as np
import pytest
from pydantic import ValidationError

from app.exceptions import CaseSeriesError
from app.models.case_series import CaseSeries, FitConfig, ObservableKind
from app.models.parameters import DEFAULT_INITIAL_STATE, DEFAULT_PARAMETERS, FIT_INITIAL_GUESS, REFERENCE_OPTIMUM
from app.services.calibration_service import CalibrationService

FIT_DAYS = 43


@pytest.fixture(scope="module")
def clean_series():
    return CalibrationService.generate_synthetic(DEFAULT_PARAMETERS, DEFAULT_INITIAL_STATE, FIT_DAYS)


def test_objective_is_zero_on_its_own_prediction(table_params, initial_state, clean_series):
    assert CalibrationService.objective(table_params, clean_series, initial_state) <= 1e-6 * np.sum(
        clean_series.observed_array() ** 2
    )


def test_objective_grows_away_from_generating_parameters(table_params, initial_state, clean_series):
    base = CalibrationService.objective(table_params, clean_series, initial_state)
    perturbed = CalibrationService.objective(
        table_params.replace(beta2=1.1 * table_params.beta2), clean_series, initial_state
    )
    assert perturbed > base
    assert perturbed > 0.0


def test_objective_against_zeros_is_sum_of_squared_predictions(table_params, initial_state):
    series = CaseSeries(days=[0, 5, 10], observed=[0.0, 0.0, 0.0])
    predicted = CalibrationService.predict(table_params, series, initial_state)
    objective = CalibrationService.objective(table_params, series, initial_state)
    assert objective == pytest.approx(float(np.sum(predicted ** 2)), rel=1e-12)
    assert predicted[0] == pytest.approx(initial_state.I1 + initial_state.I2, rel=1e-12)


def test_fit_recovers_generating_rates(table_params, initial_state, clean_series):
    result = CalibrationService.fit(clean_series, FitConfig(), table_params, initial_state)
    assert result.converged, result.message
    for name, truth in REFERENCE_OPTIMUM.items():
        assert getattr(result.parameters, name) == pytest.approx(truth, rel=1e-2)
    assert result.objective < result.initial_objective
    assert all(later <= earlier * (1 + 1e-12) for earlier, later in zip(result.history, result.history[1:]))
    assert len(result.residuals) == FIT_DAYS
    frame = result.comparison_frame(clean_series)
    assert list(frame.columns) == ["day", "observed", "predicted"]


def test_fit_without_free_parameters_returns_fixed_set(table_params, initial_state, clean_series):
    result = CalibrationService.fit(clean_series, FitConfig(free_parameters=[]), table_params, initial_state)
    assert result.parameters == table_params
    assert result.evaluations == 1
    assert result.objective == pytest.approx(result.initial_objective)


@pytest.mark.parametrize("seed", range(10))
def test_fit_tolerates_two_percent_noise(table_params, initial_state, seed):
    noisy = CalibrationService.generate_synthetic(table_params, initial_state, FIT_DAYS, noise_rel=0.02, seed=seed)
    result = CalibrationService.fit(noisy, FitConfig(), table_params, initial_state)
    for name, truth in REFERENCE_OPTIMUM.items():
        assert getattr(result.parameters, name) == pytest.approx(truth, rel=0.1)
    # the generating rates sit on the noise floor; the fit must reach it
    floor = CalibrationService.objective(table_params, noisy, initial_state)
    assert result.objective <= floor * (1 + 1e-3)


def test_objective_ignores_row_order(table_params, initial_state, clean_series, rng):
    perturbed = table_params.replace(beta2=1.05 * table_params.beta2)
    order = rng.permutation(len(clean_series.days))
    shuffled = CaseSeries.from_unsorted(
        [clean_series.days[i] for i in order], [clean_series.observed[i] for i in order]
    )
    assert shuffled == clean_series
    assert CalibrationService.objective(perturbed, shuffled, initial_state) == pytest.approx(
        CalibrationService.objective(perturbed, clean_series, initial_state), rel=1e-12
    )


def test_fit_config_validation():
    with pytest.raises(ValidationError):
        FitConfig(free_parameters=["gamma"])
    with pytest.raises(ValidationError):
        FitConfig(free_parameters=["beta1", "beta1"])
    with pytest.raises(ValidationError):
        FitConfig(initial_guess={**FIT_INITIAL_GUESS, "beta1": -1.0})
    with pytest.raises(ValidationError):
        FitConfig(initial_guess={**FIT_INITIAL_GUESS, "beta1": 1.0})


def test_synthetic_series_is_deterministic_by_seed(table_params, initial_state):
    first = CalibrationService.generate_synthetic(table_params, initial_state, 10, noise_rel=0.05, seed=3)
    second = CalibrationService.generate_synthetic(table_params, initial_state, 10, noise_rel=0.05, seed=3)
    other = CalibrationService.generate_synthetic(table_params, initial_state, 10, noise_rel=0.05, seed=4)
    assert first.observed == second.observed
    assert first.observed != other.observed


def test_daily_new_infections_start_at_zero(table_params, initial_state):
    series = CalibrationService.generate_synthetic(
        table_params, initial_state, 5, observable_kind=ObservableKind.DAILY_NEW_INFECTIONS
    )
    assert series.observed[0] == 0.0
    assert all(value > 0.0 for value in series.observed[1:])
    # one day of incidence is close to the rate at t = 0
    rate = (table_params.beta1 * initial_state.I1 + table_params.beta2 * initial_state.I2) * (
        initial_state.S + (1 - table_params.vaccine_efficacy) * initial_state.V
    )
    assert series.observed[1] == pytest.approx(rate, rel=0.2)


def test_case_series_rejects_bad_rows():
    with pytest.raises(ValidationError):
        CaseSeries(days=[0, 2, 1], observed=[1.0, 2.0, 3.0])
    with pytest.raises(ValidationError):
        CaseSeries(days=[0, 1], observed=[1.0, -2.0])
    with pytest.raises(ValidationError):
        CaseSeries(days=[], observed=[])
    ordered = CaseSeries.from_unsorted([3, 0, 1], [30.0, 0.0, 10.0])
    assert ordered.days == [0, 1, 3]
    assert ordered.observed == [0.0, 10.0, 30.0]


def test_case_series_csv_round_trip(tmp_path, clean_series):
    path = CalibrationService.write_case_series(clean_series, tmp_path / "cases.csv")
    loaded = CalibrationService.read_case_series(path)
    assert loaded.days == clean_series.days
    assert loaded.observed == clean_series.observed


@pytest.mark.parametrize(
    "content,line",
    [
        ("when,count\n0,1\n", 1),
        ("day,observed\n", 2),
        ("day,observed\n0,1\n1,abc\n", 3),
        ("day,observed\n0,1\n1,2\n1.5,3\n", 4),
        ("day,observed\n0,1\n2,2\n1,3\n", 4),
        ("day,observed\n0,-1\n", 2),
    ],
)
def test_malformed_csv_names_the_line(tmp_path, content, line):
    path = tmp_path / "cases.csv"
    path.write_text(content)
    with pytest.raises(CaseSeriesError) as excinfo:
        CalibrationService.read_case_series(path)
    assert excinfo.value.line == line
    assert f"line {line}" in str(excinfo.value)
