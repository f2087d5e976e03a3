"""
Least-squares calibration of transmission and mutation rates against a case
time series, plus synthetic series generation and CSV ingestion.
"""
import logging
import math
from pathlib import Path
from typing import List, Optional

import numpy as np
import pandas as pd
from scipy.integrate import cumulative_trapezoid
from scipy.optimize import Bounds, minimize

from app.config import Config
from app.exceptions import CaseSeriesError, IntegrationError
from app.models.case_series import CaseSeries, FitConfig, FitResult, ObservableKind
from app.models.parameters import ModelParameters, State
from app.models.trajectory import IntegrationMethod, IntegratorConfig, Trajectory
from app.services.integrator_service import IntegratorService

logger = logging.getLogger(__name__)

INCIDENCE_GRID_STEP = 0.05


class CalibrationService:
    @staticmethod
    def _integrator(x0: State, t_end: float, output_times: List[float], rel_tol: float) -> IntegratorConfig:
        return IntegratorConfig(
            method=IntegrationMethod.DORMAND_PRINCE45,
            rel_tol=rel_tol,
            abs_tol=rel_tol * max(x0.total, 1.0),
            t_end=t_end,
            output_times=output_times,
        )

    @staticmethod
    def incidence_rate(p: ModelParameters, trajectory: Trajectory) -> np.ndarray:
        """New infections per day: (beta1 I1 + beta2 I2)(S + (1 - sigma) V)."""
        S, V, I1, I2 = (trajectory.column(name) for name in ("S", "V", "I1", "I2"))
        pool = S + (1.0 - p.vaccine_efficacy) * V
        return (p.beta1 * I1 + p.beta2 * I2) * pool

    @staticmethod
    def predict(
        p: ModelParameters,
        series: CaseSeries,
        x0: State,
        rel_tol: Optional[float] = None,
    ) -> np.ndarray:
        """Model observable on the series days."""
        rel_tol = rel_tol or Config.FIT_RTOL
        days = np.asarray(series.days, dtype=float)
        horizon = float(days[-1])

        if series.observable_kind == ObservableKind.ACTIVE_INFECTED_TOTAL:
            cfg = CalibrationService._integrator(x0, horizon, list(days), rel_tol)
            trajectory = IntegratorService.integrate(p, x0, cfg)
            return trajectory.column("I1") + trajectory.column("I2")

        # infections during (d - 1, d], zero on day 0
        count = max(1, int(math.ceil(horizon / INCIDENCE_GRID_STEP)))
        grid = np.union1d(np.linspace(0.0, horizon, count + 1), days)
        cfg = CalibrationService._integrator(x0, horizon, list(grid), rel_tol)
        trajectory = IntegratorService.integrate(p, x0, cfg)
        cumulative = cumulative_trapezoid(CalibrationService.incidence_rate(p, trajectory), grid, initial=0.0)
        upper = np.interp(days, grid, cumulative)
        lower = np.interp(np.maximum(days - 1.0, 0.0), grid, cumulative)
        return upper - lower

    @staticmethod
    def objective(p: ModelParameters, series: CaseSeries, x0: State, rel_tol: Optional[float] = None) -> float:
        """Sum of squared residuals between model observable and data."""
        predicted = CalibrationService.predict(p, series, x0, rel_tol)
        return float(np.sum((predicted - series.observed_array()) ** 2))

    @staticmethod
    def fit(series: CaseSeries, cfg: FitConfig, fixed: ModelParameters, x0: State) -> FitResult:
        """Nelder-Mead over the logarithms of the free parameters."""
        observed = series.observed_array()
        names = list(cfg.free_parameters)

        def result_for(params: ModelParameters, initial: float, evaluations: int, converged: bool,
                       history: List[float], message: str) -> FitResult:
            predicted = CalibrationService.predict(params, series, x0, cfg.rel_tol)
            residuals = predicted - observed
            return FitResult(
                parameters=params,
                objective=float(np.sum(residuals ** 2)),
                initial_objective=initial,
                evaluations=evaluations,
                converged=converged,
                residuals=residuals,
                days=list(series.days),
                predicted=predicted,
                history=history,
                message=message,
            )

        if not names:
            value = CalibrationService.objective(fixed, series, x0, cfg.rel_tol)
            logger.info("No free parameters; returning the fixed parameter set")
            return result_for(fixed, value, 1, True, [value], "no free parameters")

        guess = np.array([cfg.initial_guess.get(name, getattr(fixed, name)) for name in names], dtype=float)
        if np.any(guess <= 0):
            raise ValueError("free parameters need positive starting values for the log transform")
        lower = np.array([math.log(cfg.bounds[n][0]) if n in cfg.bounds else -np.inf for n in names])
        upper = np.array([math.log(cfg.bounds[n][1]) if n in cfg.bounds else np.inf for n in names])
        theta0 = np.log(guess)
        # fit tolerances are relative to the data scale
        scale = float(np.sum(observed ** 2)) or 1.0

        evaluations = 0

        def to_parameters(theta: np.ndarray) -> ModelParameters:
            return fixed.replace(**{name: float(math.exp(t)) for name, t in zip(names, theta)})

        def normalized(theta: np.ndarray) -> float:
            nonlocal evaluations
            evaluations += 1
            try:
                return CalibrationService.objective(to_parameters(theta), series, x0, cfg.rel_tol) / scale
            except (IntegrationError, ValueError) as e:
                logger.debug(f"objective failed at {np.exp(theta)}: {e}")
                return math.inf

        initial = normalized(theta0) * scale
        history: List[float] = []

        def record(intermediate_result) -> None:
            history.append(float(intermediate_result.fun) * scale)

        simplex = [theta0]
        for i in range(len(names)):
            vertex = theta0.copy()
            vertex[i] += cfg.simplex_step
            if vertex[i] > upper[i]:
                vertex[i] = theta0[i] - cfg.simplex_step
            simplex.append(np.clip(vertex, lower, upper))

        logger.info(f"Fitting {names} from {dict(zip(names, guess))} (initial objective {initial:.6g})")
        result = minimize(
            normalized,
            theta0,
            method="Nelder-Mead",
            bounds=Bounds(lower, upper),
            callback=record,
            options={
                "xatol": cfg.x_tol,
                "fatol": cfg.f_tol,
                "maxfev": cfg.max_evals,
                "initial_simplex": np.array(simplex),
                "adaptive": False,
            },
        )
        fitted = to_parameters(result.x)
        converged = bool(result.success)
        if not converged:
            logger.warning(f"Fit stopped without converging: {result.message}")
        else:
            logger.info(f"Fit converged after {evaluations} evaluations: {dict(zip(names, np.exp(result.x)))}")
        return result_for(fitted, initial, evaluations, converged, history, str(result.message))

    @staticmethod
    def generate_synthetic(
        p: ModelParameters,
        x0: State,
        days: int,
        noise_rel: float = 0.0,
        seed: Optional[int] = None,
        observable_kind: ObservableKind = ObservableKind.ACTIVE_INFECTED_TOTAL,
    ) -> CaseSeries:
        """Daily samples on days 0..days-1 with optional lognormal multiplicative noise."""
        if noise_rel < 0:
            raise ValueError("noise_rel must be non-negative")
        if days < 1:
            raise ValueError("days must be at least 1")
        template = CaseSeries(days=list(range(days)), observed=[0.0] * days, observable_kind=observable_kind)
        clean = CalibrationService.predict(p, template, x0, rel_tol=1e-12)
        rng = np.random.default_rng(seed)
        factors = np.exp(noise_rel * rng.standard_normal(days)) if noise_rel > 0 else np.ones(days)
        observed = np.maximum(clean, 0.0) * factors
        return CaseSeries(days=template.days, observed=observed.tolist(), observable_kind=observable_kind)

    @staticmethod
    def read_case_series(
        path, observable_kind: ObservableKind = ObservableKind.ACTIVE_INFECTED_TOTAL
    ) -> CaseSeries:
        """Read a `day,observed` CSV; errors name the offending file line."""
        try:
            frame = pd.read_csv(path, dtype=str, skip_blank_lines=True)
        except (pd.errors.ParserError, pd.errors.EmptyDataError, UnicodeDecodeError) as e:
            raise CaseSeriesError(f"cannot parse {path}: {e}") from e
        columns = [c.strip() for c in frame.columns]
        if columns != ["day", "observed"]:
            raise CaseSeriesError(f"expected header 'day,observed', got '{','.join(columns)}'", line=1)
        if frame.empty:
            raise CaseSeriesError("case series has no rows", line=2)

        days: List[int] = []
        observed: List[float] = []
        for offset, (raw_day, raw_value) in enumerate(frame.itertuples(index=False, name=None)):
            line = offset + 2
            try:
                day_value = float(str(raw_day).strip())
                value = float(str(raw_value).strip())
            except ValueError:
                raise CaseSeriesError(f"non-numeric entry '{raw_day},{raw_value}'", line=line) from None
            if not day_value.is_integer() or day_value < 0:
                raise CaseSeriesError(f"day must be a non-negative integer, got {raw_day}", line=line)
            if not math.isfinite(value) or value < 0:
                raise CaseSeriesError(f"observed must be finite and non-negative, got {raw_value}", line=line)
            if days and int(day_value) <= days[-1]:
                raise CaseSeriesError(
                    f"days must be strictly increasing ({days[-1]} then {int(day_value)})", line=line
                )
            days.append(int(day_value))
            observed.append(value)
        return CaseSeries(days=days, observed=observed, observable_kind=observable_kind)

    @staticmethod
    def write_case_series(series: CaseSeries, path) -> Path:
        path = Path(path)
        series.to_frame().to_csv(path, index=False, float_format="%.17g")
        return path
