"""
Run configuration shared by every CLI subcommand
"""
from typing import Dict, List, Optional

from pydantic import BaseModel, ConfigDict, Field, field_validator, model_validator

from app.config import Config
from app.models.case_series import FitConfig, ObservableKind
from app.models.parameters import (
    COMPARTMENTS,
    DEFAULT_INITIAL_STATE,
    DEFAULT_PARAMETERS,
    PARAMETER_NAMES,
    PARAMETER_SYMBOLS,
    ModelParameters,
    State,
)
from app.models.trajectory import IntegratorConfig

SYMBOL_ALIASES: Dict[str, str] = {symbol: name for name, symbol in PARAMETER_SYMBOLS.items()}


def canonical_parameter(name: str) -> str:
    """Spelled-out field name for a field name or its symbol (e.g. sigma)."""
    name = name.strip()
    if name in PARAMETER_NAMES:
        return name
    if name in SYMBOL_ALIASES:
        return SYMBOL_ALIASES[name]
    raise ValueError(f"unknown parameter '{name}'")


class SweepSpec(BaseModel):
    model_config = ConfigDict(frozen=True, extra="forbid")

    parameter: str
    values: List[float] = Field(default_factory=list)

    @field_validator("parameter")
    @classmethod
    def known_parameter(cls, value: str) -> str:
        return canonical_parameter(value)


class RunConfig(BaseModel):
    """Everything a subcommand needs; JSON config files deserialize into this."""

    model_config = ConfigDict(frozen=True, extra="forbid")

    parameters: Dict[str, float] = Field(default_factory=dict)
    initial_conditions: State = DEFAULT_INITIAL_STATE
    integrator: IntegratorConfig = Field(default_factory=IntegratorConfig)
    sweep: Optional[SweepSpec] = None
    out: str = Field(default_factory=Config.get_output_dir)
    svg: bool = False
    column: str = "I2"
    log_y: bool = False
    seed: Optional[int] = Field(None, ge=0)
    fit: FitConfig = Field(default_factory=FitConfig)
    data: Optional[str] = None
    observable: ObservableKind = ObservableKind.ACTIVE_INFECTED_TOTAL
    days: int = Field(43, gt=0)
    noise: float = Field(0.0, ge=0)

    @field_validator("parameters")
    @classmethod
    def known_overrides(cls, value: Dict[str, float]) -> Dict[str, float]:
        return {canonical_parameter(name): float(v) for name, v in value.items()}

    @field_validator("column")
    @classmethod
    def known_column(cls, value: str) -> str:
        if value not in COMPARTMENTS:
            raise ValueError(f"column must be one of {', '.join(COMPARTMENTS)}")
        return value

    @model_validator(mode="after")
    def overrides_are_admissible(self) -> "RunConfig":
        # surfaces range errors (negative rates, sigma > 1) at load time
        self.model_parameters()
        return self

    def model_parameters(self) -> ModelParameters:
        return DEFAULT_PARAMETERS.replace(**self.parameters)

    def merged(self, changes: dict) -> "RunConfig":
        """Copy with top-level fields replaced; nested dicts merge one level deep."""
        document = self.model_dump()
        for key, value in changes.items():
            if isinstance(value, dict) and isinstance(document.get(key), dict):
                document[key] = {**document[key], **value}
            else:
                document[key] = value
        return RunConfig.model_validate(document)
