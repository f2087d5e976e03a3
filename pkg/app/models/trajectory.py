"""
Integrator configuration and trajectory records
"""
from dataclasses import dataclass, field
from enum import Enum
from typing import List, Optional

import numpy as np
import pandas as pd
from pydantic import BaseModel, ConfigDict, Field, model_validator

from app.config import Config
from app.models.parameters import COMPARTMENTS, ModelParameters, State


class IntegrationMethod(str, Enum):
    RK4 = "RK4"
    DORMAND_PRINCE45 = "DormandPrince45"


class IntegratorConfig(BaseModel):
    """Step, tolerance and horizon settings for one integration."""

    model_config = ConfigDict(frozen=True, extra="forbid")

    method: IntegrationMethod = IntegrationMethod.DORMAND_PRINCE45
    h: float = Field(default_factory=lambda: Config.RK4_STEP, gt=0)
    # None means Config.DP45_ATOL_SCALE * N(0)
    abs_tol: Optional[float] = Field(None, gt=0)
    rel_tol: float = Field(default_factory=lambda: Config.DP45_RTOL, gt=0)
    h_min: float = Field(default_factory=lambda: Config.H_MIN, gt=0)
    h_max: float = Field(default_factory=lambda: Config.H_MAX, gt=0)
    t_end: float = Field(default_factory=lambda: Config.DEFAULT_T_END, ge=0)
    output_step: float = Field(default_factory=lambda: Config.OUTPUT_STEP, gt=0)
    output_times: Optional[List[float]] = None

    @model_validator(mode="after")
    def check_consistency(self) -> "IntegratorConfig":
        if self.h_min > self.h_max:
            raise ValueError("h_min must not exceed h_max")
        if self.output_times is not None:
            times = np.asarray(self.output_times, dtype=float)
            if times.size == 0:
                raise ValueError("output_times must not be empty")
            if np.any(np.diff(times) <= 0):
                raise ValueError("output_times must be strictly increasing")
            if times[0] < 0 or times[-1] > self.t_end:
                raise ValueError("output_times must lie within [0, t_end]")
        return self

    def replace(self, **changes) -> "IntegratorConfig":
        return IntegratorConfig.model_validate({**self.model_dump(), **changes})

    def sample_times(self) -> np.ndarray:
        """Output grid: explicit output_times, or 0, output_step, ..., t_end."""
        if self.output_times is not None:
            return np.asarray(self.output_times, dtype=float)
        count = int(np.floor(self.t_end / self.output_step + 1e-9))
        times = np.arange(count + 1, dtype=float) * self.output_step
        if self.t_end - times[-1] > 1e-9 * max(1.0, self.t_end):
            times = np.append(times, self.t_end)
        return times


@dataclass
class Trajectory:
    """Sampled solution: times (n,), states (n, 5) ordered S, V, I1, I2, R."""

    times: np.ndarray
    states: np.ndarray
    parameters: ModelParameters
    accepted_steps: int = 0
    rejected_steps: int = 0
    method: str = IntegrationMethod.DORMAND_PRINCE45.value
    label: str = ""
    meta: dict = field(default_factory=dict)

    def __post_init__(self):
        self.times = np.asarray(self.times, dtype=float)
        self.states = np.asarray(self.states, dtype=float)
        if self.times.ndim != 1 or self.times.size < 1:
            raise ValueError("trajectory needs at least one time")
        if self.states.shape != (self.times.size, len(COMPARTMENTS)):
            raise ValueError(f"states shape {self.states.shape} does not match {self.times.size} times")
        if np.any(np.diff(self.times) <= 0):
            raise ValueError("trajectory times must be strictly increasing")

    def __len__(self) -> int:
        return self.times.size

    def column(self, name: str) -> np.ndarray:
        return self.states[:, COMPARTMENTS.index(name)]

    def state_at(self, index: int) -> State:
        return State.from_array(self.states[index])

    @property
    def final_state(self) -> State:
        return self.state_at(-1)

    @property
    def totals(self) -> np.ndarray:
        return self.states.sum(axis=1)

    def to_frame(self) -> pd.DataFrame:
        frame = pd.DataFrame(self.states, columns=list(COMPARTMENTS))
        frame.insert(0, "t", self.times)
        return frame

    def to_csv(self, path) -> None:
        """CSV with header t,S,V,I1,I2,R at 17 significant digits."""
        self.to_frame().to_csv(path, index=False, float_format="%.17g")
