"""
Threshold analysis at R0i = 1: critical transmission rates, null vectors of
the disease-free Jacobian, the normal-form constants a and b, and the waning
threshold on delta above which the bifurcation turns backward.

Vectors are ordered (S, V, I1, I2, R). Normalization pivots:
strain 1 uses w4 = omega (mu + omega + alpha) and v3 = 1,
strain 2 uses w4 = 1 and v4 = 1.
"""
import logging
import math
from typing import Tuple

import numpy as np

from app.config import Config
from app.exceptions import DegenerateBifurcationError, ModelDomainError
from app.models.parameters import ModelParameters
from app.models.reports import BifurcationReport, Regime
from app.services.equilibrium_service import EquilibriumService
from app.services.reproduction_service import ReproductionService
from app.services.stability_service import StabilityService

logger = logging.getLogger(__name__)

NULLITY_TOL = 1e-9


def _check_strain(strain: int) -> None:
    if strain not in (1, 2):
        raise ValueError(f"strain must be 1 or 2, got {strain}")


class BifurcationService:
    @staticmethod
    def beta_star(p: ModelParameters, strain: int) -> float:
        """beta_i* = omega exit_i (mu + omega + alpha) / (B [(mu + omega) + (1 - sigma) alpha])"""
        _check_strain(strain)
        if p.birth_rate <= 0:
            raise ModelDomainError("critical transmission rate is undefined for B = 0")
        exit_rate = p.strain1_exit_rate if strain == 1 else p.strain2_exit_rate
        return exit_rate * p.vaccination_balance / (p.birth_rate * p.leaky_inflow)

    @staticmethod
    def at_threshold(p: ModelParameters, strain: int) -> ModelParameters:
        name = "beta1" if strain == 1 else "beta2"
        return p.replace(**{name: BifurcationService.beta_star(p, strain)})

    @staticmethod
    def threshold_jacobian(p: ModelParameters, strain: int) -> np.ndarray:
        critical = BifurcationService.at_threshold(p, strain)
        return StabilityService.jacobian(critical, EquilibriumService.disease_free(critical).state)

    @staticmethod
    def null_eigenvectors(p: ModelParameters, strain: int) -> Tuple[np.ndarray, np.ndarray]:
        """Right and left null vectors of J(E0, beta*) from the SVD, pivot-normalized."""
        _check_strain(strain)
        J = BifurcationService.threshold_jacobian(p, strain)
        U, singular, Vt = np.linalg.svd(J)
        norm = singular[0]
        if singular[-1] > NULLITY_TOL * norm:
            raise DegenerateBifurcationError(f"no null vector: smallest singular value {singular[-1]:.3e}")
        if singular[-2] <= NULLITY_TOL * norm:
            raise DegenerateBifurcationError("null space has dimension greater than one")
        w = Vt[-1].copy()
        v = U[:, -1].copy()

        if strain == 1:
            w_pivot, w_target, v_pivot = 3, p.vaccination_balance, 2
        else:
            w_pivot, w_target, v_pivot = 3, 1.0, 3
        if abs(w[w_pivot]) <= NULLITY_TOL * np.linalg.norm(w) or abs(v[v_pivot]) <= NULLITY_TOL * np.linalg.norm(v):
            raise DegenerateBifurcationError(f"zero normalization pivot for strain {strain}")
        w *= w_target / w[w_pivot]
        v /= v[v_pivot]
        # exact structural zeros
        v[np.abs(v) <= 1e-12 * np.max(np.abs(v))] = 0.0
        BifurcationService.check_pairing(w, v)
        return w, v

    @staticmethod
    def check_pairing(w: np.ndarray, v: np.ndarray) -> float:
        """v . w, rejected when it vanishes relative to |v| |w|."""
        product = float(v @ w)
        if abs(product) <= NULLITY_TOL * np.linalg.norm(v) * np.linalg.norm(w):
            raise ModelDomainError(f"left and right null vectors are orthogonal (v.w={product:.3e})")
        return product

    @staticmethod
    def closed_form_vectors(p: ModelParameters, strain: int) -> Tuple[np.ndarray, np.ndarray]:
        """Component formulas of the null vectors under the same normalization."""
        _check_strain(strain)
        w_, mu, alpha, delta = p.natural_death, p.vaccine_waning, p.vaccination_rate, p.natural_waning
        leak = 1.0 - p.vaccine_efficacy
        L, P, Q, M = p.strain1_exit_rate, p.strain2_exit_rate, p.leaky_inflow, p.vaccination_balance
        E = w_ + delta
        B, m = p.birth_rate, p.mutation_rate

        if strain == 1:
            _, r02 = ReproductionService.closed_form(p)
            A1 = M * P
            X = (
                L * (mu + w_) * E * (1 - r02) * A1
                + p.beta2 * B * (mu + w_) * m * E * Q
                - delta * (p.recovery1 * (1 - r02) * A1 + p.recovery2 * m * M) * Q
            )
            Y = L * leak * alpha * (1 - r02) * A1 + leak * p.beta2 * alpha * B * m * Q
            denominator = m * E * Q * (-M)
            w = np.array(
                [
                    ((w_ + mu) * X + mu * E * Y) / denominator,
                    (alpha * X + (w_ + alpha) * E * Y) / denominator,
                    (1 - r02) * A1 / m,
                    M,
                    (p.recovery1 * (1 - r02) * A1 + p.recovery2 * m * M) / (m * E),
                ]
            )
            v = np.array([0.0, 0.0, 1.0, 0.0, 0.0])
            return w, v

        denominator = -M * Q * E
        w11 = (P * (mu + w_) ** 2 * E - (w_ + mu) * delta * p.recovery2 * Q + mu * P * leak * alpha * E) / denominator
        w22 = (alpha * P * (mu + w_) * E - alpha * delta * p.recovery2 * Q + (w_ + alpha) * P * leak * alpha * E) / denominator
        w = np.array([w11, w22, 0.0, 1.0, p.recovery2 / E])
        v33 = -m * M / (-L * M + p.beta1 * B * Q)
        v = np.array([0.0, 0.0, v33, 1.0, 0.0])
        return w, v

    @staticmethod
    def second_derivatives(p: ModelParameters, strain: int) -> Tuple[np.ndarray, np.ndarray]:
        """Hessian tensor H[k, i, j] of the field (constant) and G[k, i] = d2 f_k / dx_i d beta at E0."""
        critical = BifurcationService.at_threshold(p, strain)
        b1, b2 = critical.beta1, critical.beta2
        leak = 1.0 - p.vaccine_efficacy
        H = np.zeros((5, 5, 5))
        for k, i, j, value in (
            (0, 0, 2, -b1),
            (0, 0, 3, -b2),
            (1, 1, 2, -leak * b1),
            (1, 1, 3, -leak * b2),
            (2, 0, 2, b1),
            (2, 1, 2, leak * b1),
            (3, 0, 3, b2),
            (3, 1, 3, leak * b2),
        ):
            H[k, i, j] = H[k, j, i] = value

        S0, V0 = EquilibriumService.disease_free_components(p)
        infected = 2 if strain == 1 else 3
        G = np.zeros((5, 5))
        G[0, infected] = -S0
        G[1, infected] = -leak * V0
        G[infected, infected] = S0 + leak * V0
        return H, G

    @staticmethod
    def constants_from_vectors(p: ModelParameters, strain: int, w: np.ndarray, v: np.ndarray) -> Tuple[float, float]:
        """a = sum v_k w_i w_j d2f_k/dx_i dx_j, b = sum v_k w_i d2f_k/dx_i dbeta."""
        H, G = BifurcationService.second_derivatives(p, strain)
        a = float(np.einsum("k,i,j,kij->", v, w, w, H))
        b = float(v @ G @ w)
        return a, b

    @staticmethod
    def a_scale(p: ModelParameters, strain: int, w: np.ndarray, v: np.ndarray) -> float:
        H, _ = BifurcationService.second_derivatives(p, strain)
        return float(np.linalg.norm(v) * np.linalg.norm(w) ** 2 * np.max(np.abs(H)))

    @staticmethod
    def regime_of(a: float, b: float, a_scale: float) -> Regime:
        """Backward only when a and b are both positive and a is resolved above rounding."""
        if abs(a) <= Config.BIFURCATION_A_TOL * a_scale:
            return Regime.FORWARD
        return Regime.BACKWARD if a > 0 and b > 0 else Regime.FORWARD

    @staticmethod
    def bifurcation_constants(p: ModelParameters, strain: int) -> Tuple[float, float]:
        w, v = BifurcationService.null_eigenvectors(p, strain)
        return BifurcationService.constants_from_vectors(p, strain, w, v)

    @staticmethod
    def _threshold_terms(p: ModelParameters, strain: int) -> Tuple[float, float]:
        """(s, c) with a proportional to delta c / (omega + delta) - s; w5 = c / (omega + delta)."""
        w_, mu, alpha = p.natural_death, p.vaccine_waning, p.vaccination_rate
        leak = 1.0 - p.vaccine_efficacy
        L, P, Q, M = p.strain1_exit_rate, p.strain2_exit_rate, p.leaky_inflow, p.vaccination_balance
        G = mu + leak * (w_ + alpha)
        if strain == 2:
            s = P * ((mu + w_) * Q + leak * alpha * G) / Q ** 2
            return s, p.recovery2
        _, r02 = ReproductionService.closed_form(p)
        m, B = p.mutation_rate, p.birth_rate
        A1 = M * P
        s = (
            (1 - r02) * A1 * L * (mu + w_) / (m * Q)
            + (mu + w_) * p.beta2 * B
            + G * L * leak * alpha * (1 - r02) * A1 / (m * Q ** 2)
            + G * leak * p.beta2 * alpha * B / Q
        )
        c = (p.recovery1 * (1 - r02) * A1 + p.recovery2 * m * M) / m
        return s, c

    @staticmethod
    def delta_star_display(p: ModelParameters, strain: int) -> float:
        """The threshold expression s / w5 evaluated at the current delta."""
        _check_strain(strain)
        s, c = BifurcationService._threshold_terms(p, strain)
        w5 = c / (p.natural_death + p.natural_waning)
        if w5 == 0.0:
            raise DegenerateBifurcationError("w5 vanishes; delta threshold undefined")
        return s / w5

    @staticmethod
    def delta_star(p: ModelParameters, strain: int) -> float:
        """Value of delta at which a changes sign, all other rates fixed.

        The displayed threshold depends on delta through w5, so the crossing
        solves delta = s (omega + delta) / c, i.e. delta = s omega / (c - s).
        Returns inf when a stays non-positive for every delta.
        """
        _check_strain(strain)
        s, c = BifurcationService._threshold_terms(p, strain)
        if c == 0.0:
            raise DegenerateBifurcationError("w5 vanishes; delta threshold undefined")
        if c - s <= 0.0:
            return math.inf
        return s * p.natural_death / (c - s)

    @staticmethod
    def closed_form_constants(p: ModelParameters, strain: int) -> Tuple[float, float]:
        """a and b from the written-out expressions.

        The written expressions for a count each mixed partial once, so the
        full symmetric sum is twice their value.
        """
        _check_strain(strain)
        w_, mu, alpha, delta = p.natural_death, p.vaccine_waning, p.vaccination_rate, p.natural_waning
        leak = 1.0 - p.vaccine_efficacy
        L, P, Q, M = p.strain1_exit_rate, p.strain2_exit_rate, p.leaky_inflow, p.vaccination_balance
        G = mu + leak * (w_ + alpha)
        B, m = p.birth_rate, p.mutation_rate
        S0, V0 = EquilibriumService.disease_free_components(p)
        pool = S0 + leak * V0

        if strain == 2:
            w55 = p.recovery2 / (w_ + delta)
            half = -P * (P * (mu + w_) * Q + P * leak * alpha * G) / (B * Q ** 2) + delta * w55 * P / B
            return 2.0 * half, pool

        _, r02 = ReproductionService.closed_form(p)
        A1 = M * P
        w5 = (p.recovery1 * (1 - r02) * A1 + p.recovery2 * m * M) / (m * (w_ + delta))
        half = (
            -((1 - r02) ** 2) * A1 ** 2 * L ** 2 * (mu + w_) / (m ** 2 * B * Q)
            - (1 - r02) * A1 * L * (mu + w_) * p.beta2 / m
            - G * L ** 2 * leak * alpha * (1 - r02) ** 2 * A1 ** 2 / (m ** 2 * B * Q ** 2)
            - G * leak * p.beta2 * alpha * (1 - r02) * A1 * L / (m * Q)
            + delta * (1 - r02) * A1 * L * w5 / (m * B)
        )
        b = (1 - r02) * A1 * pool / m
        return 2.0 * half, b

    @staticmethod
    def analyze(p: ModelParameters, strain: int) -> BifurcationReport:
        _check_strain(strain)
        beta = BifurcationService.beta_star(p, strain)
        w, v = BifurcationService.null_eigenvectors(p, strain)
        a, b = BifurcationService.constants_from_vectors(p, strain, w, v)
        a_closed, b_closed = BifurcationService.closed_form_constants(p, strain)
        for label, generic, closed in (("a", a, a_closed), ("b", b, b_closed)):
            if abs(generic - closed) > 1e-8 * max(abs(generic), abs(closed), 1e-300):
                logger.warning(f"strain {strain}: generic {label}={generic!r} vs closed form {closed!r}")

        J = BifurcationService.threshold_jacobian(p, strain)
        eigenvalues = StabilityService.eigenvalues(J)
        zero_index = int(np.argmin(np.abs(eigenvalues)))
        others = np.delete(eigenvalues, zero_index)

        a_scale = BifurcationService.a_scale(p, strain, w, v)
        a_negligible = abs(a) <= Config.BIFURCATION_A_TOL * a_scale
        if a_negligible:
            logger.warning(f"strain {strain}: a={a:.3e} is rounding noise against scale {a_scale:.3e}; regime taken as forward")
        regime = BifurcationService.regime_of(a, b, a_scale)
        report = BifurcationReport(
            strain=strain,
            beta_star=beta,
            w=w,
            v=v,
            a=a,
            b=b,
            a_closed_form=a_closed,
            b_closed_form=b_closed,
            delta_star=BifurcationService.delta_star(p, strain),
            delta_star_display=BifurcationService.delta_star_display(p, strain),
            regime=regime,
            zero_eigenvalue_residual=float(abs(eigenvalues[zero_index])),
            other_eigenvalues_negative=bool(np.all(others.real < 0)),
            v_dot_w=float(v @ w),
            a_scale=a_scale,
            a_negligible=a_negligible,
        )
        logger.info(f"Strain {strain}: beta*={beta:.6g}, a={a:.6g}, b={b:.6g}, regime={regime.value}")
        return report
