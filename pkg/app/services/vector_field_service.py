"""
Vector field of the SVI1I2R system and its conservation/region identities.

Compartment order everywhere: S, V, I1, I2, R.

    S'  = B - wS - b1 S I1 - b2 S I2 - aS + mu V + d R
    V'  = -wV - (1-s) b1 V I1 - (1-s) b2 V I2 + aS - mu V
    I1' = -(w + w1 + m + r1) I1 + b1 S I1 + (1-s) b1 V I1
    I2' = -(w + w2 + r2) I2 + m I1 + b2 S I2 + (1-s) b2 V I2
    R'  = -(w + d) R + r1 I1 + r2 I2
"""
import logging
from typing import Callable

import numpy as np

from app.exceptions import ModelDomainError
from app.models.parameters import ModelParameters, State

logger = logging.getLogger(__name__)

VectorField = Callable[[np.ndarray], np.ndarray]


class VectorFieldService:
    @staticmethod
    def make_vector_field(p: ModelParameters) -> VectorField:
        """Closure over plain floats for integrator hot loops.

        Accepts y of shape (5,) or (5, k) and returns the same shape.
        """
        B = p.birth_rate
        w = p.natural_death
        b1, b2 = p.beta1, p.beta2
        alpha, mu, delta = p.vaccination_rate, p.vaccine_waning, p.natural_waning
        leak = 1.0 - p.vaccine_efficacy
        m = p.mutation_rate
        r1, r2 = p.recovery1, p.recovery2
        exit1 = p.strain1_exit_rate
        exit2 = p.strain2_exit_rate

        def field(y: np.ndarray) -> np.ndarray:
            S, V, I1, I2, R = y
            force1 = b1 * I1
            force2 = b2 * I2
            dS = B - w * S - force1 * S - force2 * S - alpha * S + mu * V + delta * R
            dV = -w * V - leak * (force1 + force2) * V + alpha * S - mu * V
            dI1 = -exit1 * I1 + b1 * I1 * (S + leak * V)
            dI2 = -exit2 * I2 + m * I1 + b2 * I2 * (S + leak * V)
            dR = -(w + delta) * R + r1 * I1 + r2 * I2
            return np.array([dS, dV, dI1, dI2, dR])

        return field

    @staticmethod
    def derivative_array(p: ModelParameters, y: np.ndarray) -> np.ndarray:
        y = np.asarray(y, dtype=float)
        if y.shape[0] != 5:
            raise ModelDomainError(f"state array must have 5 rows, got shape {y.shape}")
        if not np.all(np.isfinite(y)):
            raise ModelDomainError("state contains non-finite components")
        return VectorFieldService.make_vector_field(p)(y)

    @staticmethod
    def rhs(p: ModelParameters, x: State) -> np.ndarray:
        """Five right-hand sides at (p, x), persons/day."""
        if not x.is_finite:
            raise ModelDomainError(f"state contains non-finite components: {x}")
        return VectorFieldService.make_vector_field(p)(x.as_array())

    @staticmethod
    def total_population(x: State) -> float:
        return x.total

    @staticmethod
    def region_bound(p: ModelParameters) -> float:
        """B / omega, the population ceiling of the feasible region."""
        return p.birth_rate / p.natural_death

    @staticmethod
    def population_derivative(p: ModelParameters, x: State) -> float:
        """N' = B - omega N - omega1 I1 - omega2 I2"""
        return p.birth_rate - p.natural_death * x.total - p.excess_death1 * x.I1 - p.excess_death2 * x.I2

    @staticmethod
    def conservation_residual(p: ModelParameters, x: State) -> float:
        """Sum of the five derivatives minus N'; zero up to rounding."""
        derivative = VectorFieldService.rhs(p, x)
        return float(np.sum(derivative) - VectorFieldService.population_derivative(p, x))

    @staticmethod
    def in_region(p: ModelParameters, x: State) -> bool:
        """True iff every component is non-negative and N <= B/omega."""
        values = x.as_array()
        if not np.all(np.isfinite(values)) or np.any(values < 0):
            return False
        return bool(values.sum() <= VectorFieldService.region_bound(p))
