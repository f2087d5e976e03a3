"""
Case data and calibration configuration/results
"""
from dataclasses import dataclass, field
from enum import Enum
from typing import Dict, List, Tuple

import numpy as np
import pandas as pd
from pydantic import BaseModel, ConfigDict, Field, model_validator

from app.config import Config
from app.models.parameters import FIT_INITIAL_GUESS, PARAMETER_NAMES, ModelParameters
from app.utils.serialization import to_jsonable


class ObservableKind(str, Enum):
    ACTIVE_INFECTED_TOTAL = "ActiveInfectedTotal"
    DAILY_NEW_INFECTIONS = "DailyNewInfections"


class CaseSeries(BaseModel):
    """Observed counts on integer day offsets from t = 0."""

    model_config = ConfigDict(frozen=True, extra="forbid")

    days: List[int]
    observed: List[float]
    observable_kind: ObservableKind = ObservableKind.ACTIVE_INFECTED_TOTAL

    @model_validator(mode="after")
    def check_series(self) -> "CaseSeries":
        if len(self.days) != len(self.observed):
            raise ValueError("days and observed must have the same length")
        if not self.days:
            raise ValueError("case series is empty")
        if self.days[0] < 0:
            raise ValueError("days must be non-negative")
        for row, (prev, cur) in enumerate(zip(self.days, self.days[1:]), start=1):
            if cur <= prev:
                raise ValueError(f"days must be strictly increasing (row {row}: {prev} -> {cur})")
        values = np.asarray(self.observed, dtype=float)
        if not np.all(np.isfinite(values)) or np.any(values < 0):
            raise ValueError("observed values must be finite and non-negative")
        return self

    @classmethod
    def from_unsorted(
        cls,
        days: List[int],
        observed: List[float],
        observable_kind: ObservableKind = ObservableKind.ACTIVE_INFECTED_TOTAL,
    ) -> "CaseSeries":
        order = np.argsort(np.asarray(days), kind="stable")
        return cls(
            days=[int(days[i]) for i in order],
            observed=[float(observed[i]) for i in order],
            observable_kind=observable_kind,
        )

    @property
    def horizon(self) -> int:
        return self.days[-1]

    def observed_array(self) -> np.ndarray:
        return np.asarray(self.observed, dtype=float)

    def to_frame(self) -> pd.DataFrame:
        return pd.DataFrame({"day": self.days, "observed": self.observed})


def _default_bounds() -> Dict[str, Tuple[float, float]]:
    return {
        "beta1": (1e-13, 1e-6),
        "beta2": (1e-13, 1e-6),
        "mutation_rate": (1e-8, 1.0),
    }


class FitConfig(BaseModel):
    model_config = ConfigDict(frozen=True, extra="forbid")

    free_parameters: List[str] = Field(default_factory=lambda: list(FIT_INITIAL_GUESS))
    initial_guess: Dict[str, float] = Field(default_factory=lambda: dict(FIT_INITIAL_GUESS))
    bounds: Dict[str, Tuple[float, float]] = Field(default_factory=_default_bounds)
    x_tol: float = Field(default_factory=lambda: Config.FIT_X_TOL, gt=0)
    f_tol: float = Field(default_factory=lambda: Config.FIT_F_TOL, gt=0)
    max_evals: int = Field(default_factory=lambda: Config.FIT_MAX_EVALS, gt=0)
    simplex_step: float = Field(0.25, gt=0)
    rel_tol: float = Field(default_factory=lambda: Config.FIT_RTOL, gt=0)

    @model_validator(mode="after")
    def check_fit_config(self) -> "FitConfig":
        for name in self.free_parameters:
            if name not in PARAMETER_NAMES:
                raise ValueError(f"unknown free parameter '{name}'")
        if len(set(self.free_parameters)) != len(self.free_parameters):
            raise ValueError("free parameters must be distinct")
        for name, (lower, upper) in self.bounds.items():
            if not 0 < lower < upper:
                raise ValueError(f"bounds for '{name}' must satisfy 0 < lower < upper")
        for name, guess in self.initial_guess.items():
            if guess <= 0:
                raise ValueError(f"initial guess for '{name}' must be positive")
            if name in self.bounds:
                lower, upper = self.bounds[name]
                if not lower <= guess <= upper:
                    raise ValueError(f"initial guess for '{name}' lies outside its bounds")
        return self


@dataclass
class FitResult:
    parameters: ModelParameters
    objective: float
    initial_objective: float
    evaluations: int
    converged: bool
    residuals: np.ndarray
    days: List[int]
    predicted: np.ndarray
    history: List[float] = field(default_factory=list)
    message: str = ""

    @property
    def fitted(self) -> Dict[str, float]:
        return self.parameters.model_dump()

    def comparison_frame(self, series: CaseSeries) -> pd.DataFrame:
        return pd.DataFrame({"day": series.days, "observed": series.observed, "predicted": self.predicted})

    def to_dict(self) -> dict:
        return {
            "parameters": self.parameters.model_dump(),
            "objective": to_jsonable(self.objective),
            "initial_objective": to_jsonable(self.initial_objective),
            "evaluations": self.evaluations,
            "converged": self.converged,
            "message": self.message,
            "residuals": [{"day": d, "residual": to_jsonable(r)} for d, r in zip(self.days, self.residuals)],
            "history": to_jsonable(self.history),
        }
