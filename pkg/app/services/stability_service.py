"""
Local stability diagnostics: Jacobians, spectra, characteristic polynomials,
Routh-Hurwitz conditions and the linear Lyapunov function of the
disease-free state.
"""
import logging
from typing import List, Tuple

import numpy as np

from app.config import Config
from app.exceptions import EigenSolverError, ThresholdDegenerateError
from app.models.parameters import ModelParameters, State
from app.models.reports import (
    Classification,
    EquilibriumPoint,
    RouthHurwitzReport,
    StabilityReport,
)
from app.services.vector_field_service import VectorFieldService

logger = logging.getLogger(__name__)


class StabilityService:
    @staticmethod
    def jacobian(p: ModelParameters, x: State) -> np.ndarray:
        """Analytic partial derivatives of the five right-hand sides."""
        S, V, I1, I2, R = x.as_array()
        w = p.natural_death
        b1, b2 = p.beta1, p.beta2
        alpha, mu, delta = p.vaccination_rate, p.vaccine_waning, p.natural_waning
        leak = 1.0 - p.vaccine_efficacy
        pool = S + leak * V
        force = b1 * I1 + b2 * I2
        return np.array(
            [
                [-w - force - alpha, mu, -b1 * S, -b2 * S, delta],
                [alpha, -w - leak * force - mu, -leak * b1 * V, -leak * b2 * V, 0.0],
                [b1 * I1, leak * b1 * I1, -p.strain1_exit_rate + b1 * pool, 0.0, 0.0],
                [b2 * I2, leak * b2 * I2, p.mutation_rate, -p.strain2_exit_rate + b2 * pool, 0.0],
                [0.0, 0.0, p.recovery1, p.recovery2, -(w + delta)],
            ]
        )

    @staticmethod
    def numeric_jacobian(p: ModelParameters, x: State) -> np.ndarray:
        """Central differences with step 1e-5 * max(1, |x_i|)."""
        field = VectorFieldService.make_vector_field(p)
        base = x.as_array()
        J = np.empty((5, 5))
        for i in range(5):
            step = 1e-5 * max(1.0, abs(base[i]))
            up, down = base.copy(), base.copy()
            up[i] += step
            down[i] -= step
            J[:, i] = (field(up) - field(down)) / (2.0 * step)
        return J

    @staticmethod
    def eigenvalues(M: np.ndarray) -> np.ndarray:
        """Spectrum sorted by real part descending, checked by eigen-residuals."""
        M = np.asarray(M, dtype=float)
        if not np.all(np.isfinite(M)):
            raise EigenSolverError("matrix has non-finite entries", M)
        try:
            values, vectors = np.linalg.eig(M)
        except np.linalg.LinAlgError as e:
            raise EigenSolverError(f"eigenvalue iteration failed: {e}", M) from e
        norm = np.linalg.norm(M, 2)
        tolerance = Config.EIGEN_RESIDUAL_SCALE * norm
        for j, tau in enumerate(values):
            vector = vectors[:, j]
            residual = np.linalg.norm(M @ vector - tau * vector) / max(np.linalg.norm(vector), 1e-300)
            if residual > tolerance and residual > 1e-300:
                raise EigenSolverError(f"eigen-residual {residual:.3e} exceeds {tolerance:.3e} for tau={tau}", M)
        order = np.lexsort((-values.imag, -values.real))
        return values[order]

    @staticmethod
    def char_poly(M: np.ndarray) -> Tuple[float, ...]:
        """(k1, ..., kn) of tau^n + k1 tau^(n-1) + ... + kn by Faddeev-LeVerrier."""
        M = np.asarray(M, dtype=float)
        n = M.shape[0]
        identity = np.eye(n)
        Mk = np.zeros_like(M)
        c = 1.0
        coeffs: List[float] = []
        for k in range(1, n + 1):
            Mk = M @ Mk + c * identity
            c = -np.trace(M @ Mk) / k
            coeffs.append(float(c))
        return tuple(coeffs)

    @staticmethod
    def hurwitz_minors(coeffs) -> List[float]:
        """Leading principal minors of the Hurwitz matrix of the monic polynomial.

        The variable is rescaled first (tau = c z, c > 0), which keeps every
        minor's sign. A minor within Config.HURWITZ_ZERO_TOL of the product of
        its row norms is reported as exactly 0. The last minor is kn times the
        one before it.
        """
        n = len(coeffs)
        if n == 0:
            return []
        k = [float(c) for c in coeffs]
        c = max((abs(ki) ** (1.0 / i) for i, ki in enumerate(k, start=1) if ki != 0.0), default=1.0)
        a = [1.0] + [ki / c ** i for i, ki in enumerate(k, start=1)]

        def entry(i: int, j: int) -> float:
            index = 2 * j - i
            return a[index] if 0 <= index <= n else 0.0

        H = np.array([[entry(i, j) for j in range(1, n + 1)] for i in range(1, n + 1)])
        minors: List[float] = []
        for size in range(1, n):
            block = H[:size, :size]
            value = float(np.linalg.det(block))
            scale = float(np.prod(np.linalg.norm(block, axis=1)))
            minors.append(0.0 if abs(value) <= Config.HURWITZ_ZERO_TOL * scale else value)
        minors.append(a[n] * minors[-1] if n > 1 else a[1])
        # undo the rescaling: the size-j minor carries c^(j(j+1)/2)
        return [d * c ** (j * (j + 1) // 2) for j, d in enumerate(minors, start=1)]

    @staticmethod
    def routh_hurwitz(coeffs) -> RouthHurwitzReport:
        """The three coefficient condition groups for a quintic.

        These groups are sufficient for stability; the Hurwitz minors carried
        alongside are the exact criterion.
        """
        k1, k2, k3, k4, k5 = (float(k) for k in coeffs)
        positivity = [k > 0 for k in (k1, k2, k3, k4, k5)]
        second = k1 * k2 * k3 > k3 ** 2 + k1 ** 2 * k4
        third = (k1 * k4 - k5) * (k1 * k2 * k3 - k3 ** 2 - k1 ** 2 * k4) > k5 * (k1 * k2 - k3) ** 2 + k1 * k5 ** 2
        return RouthHurwitzReport(
            coefficients=(k1, k2, k3, k4, k5),
            positivity=positivity,
            second_condition=bool(second),
            third_condition=bool(third),
            hurwitz_minors=StabilityService.hurwitz_minors((k1, k2, k3, k4, k5)),
        )

    @staticmethod
    def expanded_coefficients(J: np.ndarray) -> Tuple[float, float, float, float]:
        """k1..k4 written out entrywise for the sparsity pattern of the model Jacobian."""
        d = {(i + 1) * 10 + (j + 1): float(J[i, j]) for i in range(5) for j in range(5)}
        d11, d12, d13, d14, d15 = d[11], d[12], d[13], d[14], d[15]
        d21, d22, d23, d24 = d[21], d[22], d[23], d[24]
        d31, d32, d33 = d[31], d[32], d[33]
        d41, d42, d43, d44 = d[41], d[42], d[43], d[44]
        d53, d54, d55 = d[53], d[54], d[55]

        k1 = -d11 - d22 - d33 - d44 - d55
        k2 = (
            d11 * d22 - d12 * d21 - d31 * d13 - d14 * d41 - d23 * d32 - d24 * d42
            + d44 * (d11 + d22 + d33) - d33 * (-d11 - d22) - d55 * (-d11 - d22 - d33 - d44)
        )
        a13 = d11 * d13 + d12 * d23
        a23 = d21 * d13 + d22 * d23
        a14 = d11 * d14 + d12 * d24
        a24 = d21 * d14 + d22 * d24
        a34 = d31 * d14 + d32 * d24
        m12 = d11 * d22 - d12 * d21
        p33 = d13 * d31 + d23 * d32
        p44 = d14 * d41 + d24 * d42
        s3 = d11 + d22 + d33
        inner = -d11 * d22 + d12 * d21 + p33 + d33 * (-d11 - d22)
        k3 = (
            -d15 * d53 * d31 - d15 * d54 * d41 - d31 * a13 - d32 * a23 - d41 * a14 - d42 * a24 - d43 * a34
            + s3 * p44 - d33 * m12 - p33 * (-d11 - d22) + d44 * inner
            - d55 * (m12 - p33 - d14 * d41 - d24 * d42 + d44 * s3 - d33 * (-d11 - d22))
        )
        k4 = (
            -d53 * (d11 * d31 * d15 + d21 * d32 * d15 + d31 * d15 * d33)
            - d54 * (d11 * d41 * d15 + d21 * d15 * d42 + d31 * d15 * d43 - d41 * d15 * d44)
            - d41 * (d11 * a14 + d12 * a24 + d13 * a34)
            - d42 * (d21 * a14 + d22 * a24 + d23 * a34)
            - d43 * (d31 * a14 + d32 * a24 + d33 * a34)
            + s3 * (d41 * a14 + d42 * a24 + d43 * a34)
            + p44 * inner
            + d44 * (d31 * a13 + d32 * a23 + d33 * m12 + p33 * (-d11 - d22))
            - (d31 * d15 * d53 + d41 * d15 * d54) * (-d11 - d22 - d33 - d44)
            - d55 * (
                -d31 * a13 - d32 * a23 - d41 * a14 - d42 * a24 - d43 * a34
                + s3 * p44 - d33 * m12 - p33 * (-d11 - d22) + d44 * inner
            )
        )
        return k1, k2, k3, k4

    @staticmethod
    def check_expanded_coefficients(J: np.ndarray, coeffs) -> List[bool]:
        """Compare the written-out k1..k4 against the recursion; mismatches are logged only."""
        written = StabilityService.expanded_coefficients(J)
        scale = max(np.linalg.norm(J, 2), 1e-300)
        agreement = []
        for i, (a, b) in enumerate(zip(written, coeffs[:4]), start=1):
            ok = abs(a - b) <= 1e-8 * max(abs(b), scale ** i)
            if not ok:
                logger.warning(f"written-out k{i}={a!r} differs from Faddeev-LeVerrier k{i}={b!r}")
            agreement.append(ok)
        return agreement

    @staticmethod
    def classify_spectrum(eigenvalues: np.ndarray) -> Classification:
        scale = float(np.max(np.abs(eigenvalues))) if eigenvalues.size else 0.0
        band = Config.MARGINAL_BAND * scale
        real = eigenvalues.real
        if np.any(np.abs(real) <= band):
            return Classification.MARGINAL
        if np.any(real > 0):
            return Classification.UNSTABLE
        return Classification.STABLE

    @staticmethod
    def classify(p: ModelParameters, point: EquilibriumPoint) -> StabilityReport:
        J = StabilityService.jacobian(p, point.state)
        eigenvalues = StabilityService.eigenvalues(J)
        coeffs = StabilityService.char_poly(J)
        StabilityService.check_expanded_coefficients(J, coeffs)
        report = StabilityReport(
            point=point,
            jacobian=J,
            eigenvalues=eigenvalues,
            char_poly_coeffs=coeffs,
            routh_hurwitz=StabilityService.routh_hurwitz(coeffs),
            classification=StabilityService.classify_spectrum(eigenvalues),
        )
        logger.info(f"{point.kind.value} point classified {report.classification.value}")
        return report

    @staticmethod
    def dfe_lyapunov_weights(p: ModelParameters) -> Tuple[float, float]:
        """C1 = 1/L - m M / (P (beta1 B Q - L M)), C2 = 1/P.

        L, P are the strain exit rates, Q the leaky inflow and
        M = omega (mu + omega + alpha).
        """
        exit1, exit2 = p.strain1_exit_rate, p.strain2_exit_rate
        balance = p.vaccination_balance
        denominator = p.beta1 * p.birth_rate * p.leaky_inflow - exit1 * balance
        if abs(denominator) <= 1e-14 * exit1 * balance:
            raise ThresholdDegenerateError("C1 is undefined when R01 = 1")
        c1 = 1.0 / exit1 - p.mutation_rate * balance / (exit2 * denominator)
        c2 = 1.0 / exit2
        return c1, c2

    @staticmethod
    def dfe_lyapunov_derivative(p: ModelParameters, x: State) -> float:
        """C1 I1' + C2 I2' along the vector field."""
        c1, c2 = StabilityService.dfe_lyapunov_weights(p)
        derivative = VectorFieldService.rhs(p, x)
        return float(c1 * derivative[2] + c2 * derivative[3])
