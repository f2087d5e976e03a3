"""
Result records produced by the analysis services
"""
from dataclasses import dataclass, field
from enum import Enum
from typing import Dict, List, Optional, Tuple

import numpy as np
import pandas as pd

from app.models.parameters import PARAMETER_SYMBOLS, State
from app.utils.serialization import to_jsonable


class EquilibriumKind(str, Enum):
    DISEASE_FREE = "DiseaseFree"
    ENDEMIC = "Endemic"


class Classification(str, Enum):
    STABLE = "LocallyAsymptoticallyStable"
    UNSTABLE = "Unstable"
    MARGINAL = "Marginal"


class Regime(str, Enum):
    BACKWARD = "Backward"
    FORWARD = "Forward"


class SignClass(str, Enum):
    POSITIVE = "Positive"
    NEGATIVE = "Negative"
    NEUTRAL = "Neutral"

    @classmethod
    def of(cls, value: float) -> "SignClass":
        if value > 0:
            return cls.POSITIVE
        if value < 0:
            return cls.NEGATIVE
        return cls.NEUTRAL


@dataclass
class EquilibriumPoint:
    """A steady state with its max-norm residual."""

    kind: EquilibriumKind
    state: State
    residual_norm: float
    aux_C: Optional[float] = None
    strain2_only: bool = False
    iterations: int = 0

    def to_dict(self) -> dict:
        return {
            "kind": self.kind.value,
            "state": self.state.model_dump(),
            "residual_norm": to_jsonable(self.residual_norm),
            "aux_C": to_jsonable(self.aux_C),
            "strain2_only": self.strain2_only,
            "iterations": self.iterations,
        }


@dataclass
class ReproductionNumbers:
    r01: float
    r02: float
    from_closed_form: Tuple[float, float]
    from_spectral: Tuple[float, float]
    ngm_F: np.ndarray
    ngm_V: np.ndarray
    ngm_K: np.ndarray
    spectral_radius: float

    @property
    def dominant_strain(self) -> int:
        return 1 if self.r01 >= self.r02 else 2

    def to_dict(self) -> dict:
        return {
            "r01": self.r01,
            "r02": self.r02,
            "from_closed_form": list(self.from_closed_form),
            "from_spectral": list(self.from_spectral),
            "spectral_radius": self.spectral_radius,
            "dominant_strain": self.dominant_strain,
            "ngm_F": to_jsonable(self.ngm_F),
            "ngm_V": to_jsonable(self.ngm_V),
            "ngm_K": to_jsonable(self.ngm_K),
        }


@dataclass
class RouthHurwitzReport:
    """Outcome of the three coefficient condition groups, plus the exact minors."""

    coefficients: Tuple[float, ...]
    positivity: List[bool]
    second_condition: bool
    third_condition: bool
    hurwitz_minors: List[float] = field(default_factory=list)

    @property
    def positivity_satisfied(self) -> bool:
        return all(self.positivity)

    @property
    def satisfied(self) -> bool:
        return self.positivity_satisfied and self.second_condition and self.third_condition

    @property
    def minors_positive(self) -> bool:
        return self.positivity_satisfied and bool(self.hurwitz_minors) and all(d > 0 for d in self.hurwitz_minors)

    def to_dict(self) -> dict:
        return {
            "coefficients": to_jsonable(self.coefficients),
            "positivity": self.positivity,
            "second_condition": self.second_condition,
            "third_condition": self.third_condition,
            "satisfied": self.satisfied,
            "hurwitz_minors": to_jsonable(self.hurwitz_minors),
            "minors_positive": self.minors_positive,
        }


@dataclass
class StabilityReport:
    point: EquilibriumPoint
    jacobian: np.ndarray
    eigenvalues: np.ndarray
    char_poly_coeffs: Tuple[float, ...]
    routh_hurwitz: RouthHurwitzReport
    classification: Classification

    @property
    def routh_hurwitz_satisfied(self) -> bool:
        return self.routh_hurwitz.satisfied

    def to_dict(self) -> dict:
        return {
            "point": self.point.to_dict(),
            "jacobian": to_jsonable(self.jacobian),
            "eigenvalues": to_jsonable(self.eigenvalues),
            "char_poly_coeffs": to_jsonable(self.char_poly_coeffs),
            "routh_hurwitz": self.routh_hurwitz.to_dict(),
            "classification": self.classification.value,
        }


@dataclass
class BifurcationReport:
    strain: int
    beta_star: float
    w: np.ndarray
    v: np.ndarray
    a: float
    b: float
    a_closed_form: float
    b_closed_form: float
    delta_star: float
    delta_star_display: float
    regime: Regime
    zero_eigenvalue_residual: float
    other_eigenvalues_negative: bool
    v_dot_w: float
    # |v| |w|^2 max|d2f|; a within Config.BIFURCATION_A_TOL of it is treated as zero
    a_scale: float = 0.0
    a_negligible: bool = False

    def to_dict(self) -> dict:
        return {key: to_jsonable(value) for key, value in self.__dict__.items()}


@dataclass
class SensitivityEntry:
    parameter: str
    value_used: float
    index_r01: float
    index_r02: float

    @property
    def sign_class_r01(self) -> SignClass:
        return SignClass.of(self.index_r01)

    @property
    def sign_class_r02(self) -> SignClass:
        return SignClass.of(self.index_r02)

    def to_dict(self) -> dict:
        return {
            "parameter": self.parameter,
            "symbol": PARAMETER_SYMBOLS[self.parameter],
            "value_used": self.value_used,
            "index_r01": self.index_r01,
            "sign_class_r01": self.sign_class_r01.value,
            "index_r02": self.index_r02,
            "sign_class_r02": self.sign_class_r02.value,
        }


@dataclass
class SensitivityReport:
    r01: float
    r02: float
    entries: List[SensitivityEntry]

    def entry(self, parameter: str) -> SensitivityEntry:
        for item in self.entries:
            if item.parameter == parameter:
                return item
        raise KeyError(parameter)

    def as_mapping(self, target: str) -> Dict[str, float]:
        attribute = _index_attribute(target)
        return {item.parameter: getattr(item, attribute) for item in self.entries}

    def most_influential(self, target: str = "r01") -> str:
        """Parameter with the largest |index| for R01 or R02."""
        attribute = _index_attribute(target)
        return max(self.entries, key=lambda item: abs(getattr(item, attribute))).parameter

    def to_frame(self) -> pd.DataFrame:
        return pd.DataFrame(
            {
                "parameter": [item.parameter for item in self.entries],
                "value": [item.value_used for item in self.entries],
                "index_r01": [item.index_r01 for item in self.entries],
                "index_r02": [item.index_r02 for item in self.entries],
            }
        )

    def to_dict(self) -> dict:
        return {
            "r01": self.r01,
            "r02": self.r02,
            "most_influential": {"r01": self.most_influential("r01"), "r02": self.most_influential("r02")},
            "entries": [item.to_dict() for item in self.entries],
        }


def _index_attribute(target: str) -> str:
    if target not in ("r01", "r02"):
        raise ValueError(f"target must be 'r01' or 'r02', got '{target}'")
    return f"index_{target}"


@dataclass
class ConvergenceReport:
    """Distances to a reference equilibrium after integrating several starts."""

    reference: State
    horizon: float
    relative_distances: List[float]
    tolerance: float

    @property
    def converged(self) -> bool:
        return all(d <= self.tolerance for d in self.relative_distances)

    def to_dict(self) -> dict:
        return {
            "reference": self.reference.model_dump(),
            "horizon": self.horizon,
            "relative_distances": to_jsonable(self.relative_distances),
            "tolerance": self.tolerance,
            "converged": self.converged,
        }
