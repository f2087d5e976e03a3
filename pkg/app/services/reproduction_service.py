"""
Next-generation matrices and per-strain basic reproduction numbers
"""
import logging
from typing import Tuple

import numpy as np

from app.exceptions import ModelDomainError
from app.models.parameters import ModelParameters
from app.models.reports import ReproductionNumbers
from app.services.equilibrium_service import EquilibriumService

logger = logging.getLogger(__name__)


class ReproductionService:
    @staticmethod
    def effective_susceptibles(p: ModelParameters) -> float:
        """S0 + (1 - sigma) V0 at the disease-free state."""
        S0, V0 = EquilibriumService.disease_free_components(p)
        return S0 + (1.0 - p.vaccine_efficacy) * V0

    @staticmethod
    def ngm(p: ModelParameters) -> Tuple[np.ndarray, np.ndarray, np.ndarray]:
        """F (new infections), V (transitions) and K = F V^-1 for (I1, I2)."""
        exit1, exit2 = p.strain1_exit_rate, p.strain2_exit_rate
        if exit1 <= 0 or exit2 <= 0:
            raise ModelDomainError(f"transition matrix V is singular (exit rates {exit1}, {exit2})")
        pool = ReproductionService.effective_susceptibles(p)
        F = np.array([[p.beta1 * pool, 0.0], [0.0, p.beta2 * pool]])
        V = np.array([[exit1, 0.0], [-p.mutation_rate, exit2]])
        try:
            K = F @ np.linalg.inv(V)
        except np.linalg.LinAlgError as e:
            raise ModelDomainError(f"transition matrix V is singular: {e}") from e
        return F, V, K

    @staticmethod
    def closed_form(p: ModelParameters) -> Tuple[float, float]:
        """R0i = beta_i B [(mu + omega) + (1 - sigma) alpha] / (exit_i omega (mu + omega + alpha))"""
        numerator = p.birth_rate * p.leaky_inflow
        balance = p.vaccination_balance
        r01 = p.beta1 * numerator / (p.strain1_exit_rate * balance)
        r02 = p.beta2 * numerator / (p.strain2_exit_rate * balance)
        return r01, r02

    @staticmethod
    def reproduction_numbers(p: ModelParameters) -> ReproductionNumbers:
        F, V, K = ReproductionService.ngm(p)
        closed = ReproductionService.closed_form(p)
        # K is lower triangular, so its spectrum is its diagonal
        spectral = (float(K[0, 0]), float(K[1, 1]))
        for label, a, b in (("R01", closed[0], spectral[0]), ("R02", closed[1], spectral[1])):
            if abs(a - b) > 1e-12 * max(abs(a), abs(b), 1e-300):
                logger.warning(f"{label} routes disagree: closed form {a!r} vs spectral {b!r}")
        return ReproductionNumbers(
            r01=closed[0],
            r02=closed[1],
            from_closed_form=closed,
            from_spectral=spectral,
            ngm_F=F,
            ngm_V=V,
            ngm_K=K,
            spectral_radius=max(spectral),
        )
