"""
Normalized forward sensitivity indices Z = (p / R0)(dR0 / dp) of both
reproduction numbers, analytic with a central-difference oracle.
"""
import logging
from typing import Dict

from app.exceptions import NormalizationError
from app.models.parameters import PARAMETER_NAMES, ModelParameters
from app.models.reports import SensitivityEntry, SensitivityReport
from app.services.reproduction_service import ReproductionService

logger = logging.getLogger(__name__)


class SensitivityService:
    @staticmethod
    def analytic_indices(p: ModelParameters) -> Dict[str, Dict[str, float]]:
        """Log-derivatives of the closed forms, keyed by target then parameter."""
        w = p.natural_death
        alpha, mu, sigma = p.vaccination_rate, p.vaccine_waning, p.vaccine_efficacy
        L, P, Q = p.strain1_exit_rate, p.strain2_exit_rate, p.leaky_inflow
        W = mu + w + alpha

        shared = {
            "birth_rate": 1.0,
            "vaccination_rate": alpha * ((1.0 - sigma) / Q - 1.0 / W),
            "vaccine_waning": mu * (1.0 / Q - 1.0 / W),
            "natural_waning": 0.0,
            "vaccine_efficacy": -sigma * alpha / Q,
        }
        r01 = {name: 0.0 for name in PARAMETER_NAMES}
        r01.update(shared)
        r01.update(
            {
                "natural_death": w / Q - w / L - 1.0 - w / W,
                "beta1": 1.0,
                "excess_death1": -p.excess_death1 / L,
                "mutation_rate": -p.mutation_rate / L,
                "recovery1": -p.recovery1 / L,
            }
        )
        r02 = {name: 0.0 for name in PARAMETER_NAMES}
        r02.update(shared)
        r02.update(
            {
                "natural_death": w / Q - w / P - 1.0 - w / W,
                "beta2": 1.0,
                "excess_death2": -p.excess_death2 / P,
                "recovery2": -p.recovery2 / P,
            }
        )
        return {"r01": r01, "r02": r02}

    @staticmethod
    def sensitivity_indices(p: ModelParameters) -> SensitivityReport:
        r01, r02 = ReproductionService.closed_form(p)
        if r01 <= 0 or r02 <= 0:
            raise NormalizationError(f"sensitivity indices need R01 > 0 and R02 > 0 (got {r01}, {r02})")
        indices = SensitivityService.analytic_indices(p)
        values = p.model_dump()
        entries = [
            SensitivityEntry(
                parameter=name,
                value_used=values[name],
                index_r01=indices["r01"][name],
                index_r02=indices["r02"][name],
            )
            for name in PARAMETER_NAMES
        ]
        report = SensitivityReport(r01=r01, r02=r02, entries=entries)
        logger.info(
            f"Sensitivity: most influential for R01={report.most_influential('r01')}, "
            f"for R02={report.most_influential('r02')}"
        )
        return report

    @staticmethod
    def finite_difference_index(p: ModelParameters, name: str, target: str = "r01", rel_step: float = 1e-6) -> float:
        """Central-difference estimate of the index; 0 for a zero-valued parameter."""
        if name not in PARAMETER_NAMES:
            raise KeyError(name)
        position = 0 if target == "r01" else 1
        value = getattr(p, name)
        if value == 0.0:
            return 0.0
        h = rel_step * abs(value)
        # unvalidated copies: sigma + h may exceed 1 at a perfect vaccine
        up = ReproductionService.closed_form(p.model_copy(update={name: value + h}))[position]
        down = ReproductionService.closed_form(p.model_copy(update={name: value - h}))[position]
        base = ReproductionService.closed_form(p)[position]
        if base == 0.0:
            raise NormalizationError(f"{target} is zero; index undefined")
        return value / base * (up - down) / (2.0 * h)
