"""
Steady states: the disease-free point in closed form and endemic points by
damped Newton iteration on the full five-dimensional system.
"""
import logging
from typing import Optional, Sequence, Tuple

import numpy as np

from app.config import Config
from app.exceptions import DiseaseFreeCoincidenceError, ModelDomainError, NoEndemicEquilibriumError
from app.models.parameters import DEFAULT_INITIAL_STATE, ModelParameters, State
from app.models.reports import ConvergenceReport, EquilibriumKind, EquilibriumPoint
from app.models.trajectory import IntegrationMethod, IntegratorConfig
from app.services.integrator_service import IntegratorService
from app.services.stability_service import StabilityService
from app.services.vector_field_service import VectorFieldService

logger = logging.getLogger(__name__)


class EquilibriumService:
    @staticmethod
    def disease_free_components(p: ModelParameters) -> Tuple[float, float]:
        """S0 = B(mu + omega) / M, V0 = alpha B / M with M = omega (mu + omega + alpha)."""
        balance = p.vaccination_balance
        if p.natural_death <= 0 or balance <= 0:
            raise ModelDomainError("disease-free state needs omega > 0 and mu + omega + alpha > 0")
        S0 = p.birth_rate * (p.vaccine_waning + p.natural_death) / balance
        V0 = p.vaccination_rate * p.birth_rate / balance
        return S0, V0

    @staticmethod
    def disease_free(p: ModelParameters) -> EquilibriumPoint:
        S0, V0 = EquilibriumService.disease_free_components(p)
        state = State(S=S0, V=V0, I1=0.0, I2=0.0, R=0.0)
        residual = float(np.max(np.abs(VectorFieldService.rhs(p, state))))
        return EquilibriumPoint(kind=EquilibriumKind.DISEASE_FREE, state=state, residual_norm=residual)

    @staticmethod
    def aux_C(p: ModelParameters, I1: float, I2: float) -> float:
        """C = omega + (1 - sigma)(beta1 I1 + beta2 I2) + mu"""
        leak = 1.0 - p.vaccine_efficacy
        return p.natural_death + leak * (p.beta1 * I1 + p.beta2 * I2) + p.vaccine_waning

    @staticmethod
    def closed_form_endemic(p: ModelParameters, I1: float, I2: float) -> Tuple[float, float, float, float]:
        """S*, V*, R* and C implied by given infected levels (I1*, I2*)."""
        w, alpha, mu, delta = p.natural_death, p.vaccination_rate, p.vaccine_waning, p.natural_waning
        E = w + delta
        recovered_inflow = p.recovery1 * I1 + p.recovery2 * I2
        C = EquilibriumService.aux_C(p, I1, I2)
        force = p.beta1 * I1 + p.beta2 * I2
        S = (p.birth_rate * E + delta * recovered_inflow) * C / (E * ((w + force + alpha) * C - mu * alpha))
        V = alpha * S / C
        R = recovered_inflow / E
        return S, V, R, C

    @staticmethod
    def warmup_state(p: ModelParameters, days: Optional[float] = None) -> State:
        """Endpoint of a long integration from the reference initial state."""
        days = Config.ENDEMIC_WARMUP_DAYS if days is None else days
        cfg = IntegratorConfig(
            method=IntegrationMethod.DORMAND_PRINCE45,
            rel_tol=1e-8,
            t_end=days,
            output_times=[0.0, days],
        )
        return IntegratorService.integrate(p, DEFAULT_INITIAL_STATE, cfg).final_state

    @staticmethod
    def endemic(p: ModelParameters, guess: Optional[State] = None) -> EquilibriumPoint:
        """Solve rhs = 0 with a positive infected component.

        Raises NoEndemicEquilibriumError when Newton stalls, runs out of
        iterations or lands on a non-physical state, and
        DiseaseFreeCoincidenceError when it lands on the disease-free state.
        """
        if guess is None:
            guess = EquilibriumService.warmup_state(p)
            logger.info(f"Endemic search starting from warm-up state {guess.as_array()}")
        field = VectorFieldService.make_vector_field(p)
        x = guess.as_array()
        if not np.all(np.isfinite(x)):
            raise ModelDomainError("endemic guess has non-finite components")

        tolerance = Config.NEWTON_TOL_SCALE * max(1.0, p.birth_rate)
        F = field(x)
        residual = float(np.max(np.abs(F)))
        iterations = 0
        while residual > tolerance:
            if iterations >= Config.NEWTON_MAX_ITER:
                raise NoEndemicEquilibriumError(
                    f"Newton did not converge in {Config.NEWTON_MAX_ITER} iterations (residual {residual:.3e})"
                )
            J = StabilityService.jacobian(p, State.from_array(x))
            try:
                dx = np.linalg.solve(J, -F)
            except np.linalg.LinAlgError as e:
                raise NoEndemicEquilibriumError(f"singular Jacobian at iteration {iterations}: {e}") from e

            step = 1.0
            for _ in range(Config.NEWTON_MAX_HALVINGS + 1):
                trial = x + step * dx
                F_trial = field(trial)
                trial_residual = float(np.max(np.abs(F_trial)))
                if np.isfinite(trial_residual) and trial_residual < residual:
                    break
                step *= 0.5
            else:
                raise NoEndemicEquilibriumError(
                    f"damped Newton stalled at iteration {iterations} (residual {residual:.3e})"
                )
            x, F, residual = trial, F_trial, trial_residual
            iterations += 1

        return EquilibriumService._accept(p, x, iterations)

    @staticmethod
    def _accept(p: ModelParameters, x: np.ndarray, iterations: int) -> EquilibriumPoint:
        population = max(1.0, float(np.sum(np.abs(x))))
        zero_band = Config.INFECTED_ZERO * population
        if np.any(x < -zero_band):
            raise NoEndemicEquilibriumError(f"Newton converged to a non-physical state {x}")
        x = np.where(x < 0.0, 0.0, x)
        state = State.from_array(x)

        if state.I1 <= zero_band and state.I2 <= zero_band:
            raise DiseaseFreeCoincidenceError(
                f"Newton converged to the disease-free state after {iterations} iterations", state
            )
        if state.I1 <= zero_band:
            state = State(S=state.S, V=state.V, I1=0.0, I2=state.I2, R=state.R)

        residual = float(np.max(np.abs(VectorFieldService.rhs(p, state))))
        if residual > Config.ACCEPT_TOL_SCALE * max(1.0, p.birth_rate):
            raise NoEndemicEquilibriumError(f"endemic residual {residual:.3e} exceeds acceptance bound")

        S, V, R, C = EquilibriumService.closed_form_endemic(p, state.I1, state.I2)
        for label, solved, implied in (("S", state.S, S), ("V", state.V, V), ("R", state.R, R)):
            if abs(solved - implied) > 1e-6 * max(abs(implied), 1.0):
                logger.warning(f"Endemic {label}*={solved!r} disagrees with closed form {implied!r}")

        point = EquilibriumPoint(
            kind=EquilibriumKind.ENDEMIC,
            state=state,
            residual_norm=residual,
            aux_C=C,
            strain2_only=state.I1 == 0.0,
            iterations=iterations,
        )
        logger.info(
            f"Endemic equilibrium found in {iterations} iterations "
            f"(I1*={state.I1:.6g}, I2*={state.I2:.6g}, residual={residual:.3e})"
        )
        return point

    @staticmethod
    def endemic_convergence(
        p: ModelParameters,
        point: EquilibriumPoint,
        starts: Sequence[State],
        horizon: float,
        tolerance: float = 1e-4,
        cfg: Optional[IntegratorConfig] = None,
    ) -> ConvergenceReport:
        """Integrate every start for `horizon` days and measure the distance to `point`."""
        cfg = (cfg or IntegratorConfig(rel_tol=1e-10)).replace(t_end=horizon, output_times=[0.0, horizon])
        target = point.state.as_array()
        scale = float(np.max(np.abs(target)))
        distances = []
        for trajectory in IntegratorService.integrate_ensemble(p, list(starts), cfg):
            distances.append(float(np.max(np.abs(trajectory.states[-1] - target))) / scale)
        report = ConvergenceReport(
            reference=point.state, horizon=horizon, relative_distances=distances, tolerance=tolerance
        )
        logger.info(f"Convergence to {point.kind.value} point after {horizon} days: {report.converged}")
        return report
