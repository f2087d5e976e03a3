"""
Model parameters and compartment states of the two-strain vaccination model
"""
import json
import math
from typing import Dict, Tuple

import numpy as np
from pydantic import BaseModel, ConfigDict, Field

# Canonical parameter order; every per-parameter report follows it.
PARAMETER_NAMES: Tuple[str, ...] = (
    "birth_rate",
    "natural_death",
    "beta1",
    "beta2",
    "vaccination_rate",
    "vaccine_waning",
    "natural_waning",
    "vaccine_efficacy",
    "excess_death1",
    "excess_death2",
    "mutation_rate",
    "recovery1",
    "recovery2",
)

PARAMETER_SYMBOLS: Dict[str, str] = {
    "birth_rate": "B",
    "natural_death": "omega",
    "beta1": "beta1",
    "beta2": "beta2",
    "vaccination_rate": "alpha",
    "vaccine_waning": "mu",
    "natural_waning": "delta",
    "vaccine_efficacy": "sigma",
    "excess_death1": "omega1",
    "excess_death2": "omega2",
    "mutation_rate": "m",
    "recovery1": "r1",
    "recovery2": "r2",
}

COMPARTMENTS: Tuple[str, ...] = ("S", "V", "I1", "I2", "R")


class ModelParameters(BaseModel):
    """The thirteen rates of the SVI1I2R system (persons and days)."""

    model_config = ConfigDict(frozen=True, extra="forbid", allow_inf_nan=False)

    birth_rate: float = Field(2993.0, ge=0, description="B, recruitment (persons/day)")
    natural_death: float = Field(0.00003535, gt=0, description="omega, natural death rate (1/day)")
    beta1: float = Field(1.167817614e-9, ge=0, description="beta1, original-strain transmission (1/(person*day))")
    beta2: float = Field(7.368542050e-9, ge=0, description="beta2, mutant-strain transmission (1/(person*day))")
    vaccination_rate: float = Field(0.012, ge=0, description="alpha, vaccination rate (1/day)")
    vaccine_waning: float = Field(0.005, ge=0, description="mu, loss of vaccine immunity (1/day)")
    natural_waning: float = Field(0.0027, ge=0, description="delta, loss of natural immunity (1/day)")
    vaccine_efficacy: float = Field(0.9, ge=0, le=1, description="sigma, vaccine efficacy")
    excess_death1: float = Field(0.005579, ge=0, description="omega1, disease death, original strain (1/day)")
    excess_death2: float = Field(0.002286, ge=0, description="omega2, disease death, mutant strain (1/day)")
    mutation_rate: float = Field(0.009308731535398908, ge=0, description="m, mutation I1 -> I2 (1/day)")
    recovery1: float = Field(0.0833, ge=0, description="r1, recovery, original strain (1/day)")
    recovery2: float = Field(0.1, ge=0, description="r2, recovery, mutant strain (1/day)")

    def replace(self, **changes: float) -> "ModelParameters":
        """Copy with some fields changed; the result is re-validated."""
        return ModelParameters.model_validate({**self.model_dump(), **changes})

    def to_json(self) -> str:
        return json.dumps(self.model_dump(), indent=2)

    @classmethod
    def from_json(cls, text: str) -> "ModelParameters":
        return cls.model_validate_json(text)

    # Rate sums that recur in every closed form.
    @property
    def strain1_exit_rate(self) -> float:
        """omega + omega1 + m + r1"""
        return self.natural_death + self.excess_death1 + self.mutation_rate + self.recovery1

    @property
    def strain2_exit_rate(self) -> float:
        """omega + omega2 + r2"""
        return self.natural_death + self.excess_death2 + self.recovery2

    @property
    def leaky_inflow(self) -> float:
        """(mu + omega) + (1 - sigma) alpha"""
        return self.vaccine_waning + self.natural_death + (1.0 - self.vaccine_efficacy) * self.vaccination_rate

    @property
    def vaccination_balance(self) -> float:
        """omega (mu + omega + alpha)"""
        return self.natural_death * (self.vaccine_waning + self.natural_death + self.vaccination_rate)


class State(BaseModel):
    """One point (S, V, I1, I2, R) in persons.

    Components are not required to be non-negative here so region checks can
    be asked about any point; the vector field rejects non-finite input.
    """

    model_config = ConfigDict(frozen=True, extra="forbid")

    S: float
    V: float
    I1: float
    I2: float
    R: float

    def as_array(self) -> np.ndarray:
        return np.array([self.S, self.V, self.I1, self.I2, self.R], dtype=float)

    @classmethod
    def from_array(cls, values) -> "State":
        S, V, I1, I2, R = (float(v) for v in values)
        return cls(S=S, V=V, I1=I1, I2=I2, R=R)

    @property
    def total(self) -> float:
        return self.S + self.V + self.I1 + self.I2 + self.R

    @property
    def is_finite(self) -> bool:
        return all(math.isfinite(v) for v in (self.S, self.V, self.I1, self.I2, self.R))


# Reference configurations
DEFAULT_PARAMETERS = ModelParameters()

FIT_INITIAL_GUESS: Dict[str, float] = {
    "beta1": 4e-9,
    "beta2": 8.5e-9,
    "mutation_rate": 0.01,
}

REFERENCE_OPTIMUM: Dict[str, float] = {
    "beta1": 1.167817614e-9,
    "beta2": 7.36854205e-9,
    "mutation_rate": 0.009308731535398908,
}

# Treated as t = 0 values; N(0) sits slightly above B/omega.
DEFAULT_INITIAL_STATE = State(S=26195740.0, V=51202223.0, I1=269725.0, I2=2724.0, R=7009861.0)
