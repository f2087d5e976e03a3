"""
Explicit integrators for the five-compartment system: classical RK4 with a
fixed step and Dormand-Prince 5(4) with embedded error control. Both sample
the solution on the configured output grid by cubic Hermite interpolation
between accepted steps (interpolation error O(h^4)). Dormand-Prince runs
do not use the quartic dense-output polynomial native to the scheme.
"""
import logging
import math
from typing import List, Optional, Sequence, Tuple

import numpy as np

from app.config import Config
from app.exceptions import IntegrationError, ModelDomainError
from app.models.parameters import ModelParameters, State
from app.models.trajectory import IntegrationMethod, IntegratorConfig, Trajectory
from app.services.vector_field_service import VectorField, VectorFieldService

logger = logging.getLogger(__name__)

# Dormand-Prince 5(4) tableau
C2, C3, C4, C5 = 1.0 / 5.0, 3.0 / 10.0, 4.0 / 5.0, 8.0 / 9.0
A21 = 1.0 / 5.0
A31, A32 = 3.0 / 40.0, 9.0 / 40.0
A41, A42, A43 = 44.0 / 45.0, -56.0 / 15.0, 32.0 / 9.0
A51, A52, A53, A54 = 19372.0 / 6561.0, -25360.0 / 2187.0, 64448.0 / 6561.0, -212.0 / 729.0
A61, A62, A63, A64, A65 = 9017.0 / 3168.0, -355.0 / 33.0, 46732.0 / 5247.0, 49.0 / 176.0, -5103.0 / 18656.0
B1, B3, B4, B5, B6 = 35.0 / 384.0, 500.0 / 1113.0, 125.0 / 192.0, -2187.0 / 6784.0, 11.0 / 84.0
# fifth-order minus fourth-order weights
E1 = B1 - 5179.0 / 57600.0
E3 = B3 - 7571.0 / 16695.0
E4 = B4 - 393.0 / 640.0
E5 = B5 + 92097.0 / 339200.0
E6 = B6 - 187.0 / 2100.0
E7 = -1.0 / 40.0

SAFETY = 0.9
MIN_FACTOR = 0.2
MAX_FACTOR = 5.0
MAX_STEPS = 5_000_000


def _hermite(t0, y0, f0, t1, y1, f1, t):
    h = t1 - t0
    theta = (t - t0) / h
    theta2 = theta * theta
    theta3 = theta2 * theta
    h00 = 2.0 * theta3 - 3.0 * theta2 + 1.0
    h10 = theta3 - 2.0 * theta2 + theta
    h01 = -2.0 * theta3 + 3.0 * theta2
    h11 = theta3 - theta2
    return h00 * y0 + h10 * h * f0 + h01 * y1 + h11 * h * f1


class _Sampler:
    """Collects dense output on a fixed grid as steps are accepted."""

    def __init__(self, times: np.ndarray, y0: np.ndarray):
        self.times = times
        self.out = np.empty((times.size,) + y0.shape)
        self.index = 0
        while self.index < times.size and times[self.index] <= 0.0:
            self.out[self.index] = y0
            self.index += 1

    def feed(self, t0, y0, f0, t1, y1, f1) -> None:
        times = self.times
        while self.index < times.size and times[self.index] <= t1 * (1.0 + 1e-14):
            t = times[self.index]
            if abs(t - t1) <= 1e-12 * max(1.0, abs(t1)):
                self.out[self.index] = y1
            else:
                self.out[self.index] = _hermite(t0, y0, f0, t1, y1, f1, t)
            self.index += 1

    @property
    def done(self) -> bool:
        return self.index >= self.times.size


def _clamp(y: np.ndarray, band: np.ndarray) -> Optional[np.ndarray]:
    """Zero rounding undershoot; None when some component is below -band or not finite."""
    if not np.all(np.isfinite(y)):
        return None
    if np.all(y >= 0.0):
        return y
    if np.any(y < -band):
        return None
    return np.maximum(y, 0.0)


class IntegratorService:
    @staticmethod
    def integrate(p: ModelParameters, x0: State, cfg: Optional[IntegratorConfig] = None) -> Trajectory:
        """Integrate from t = 0 to cfg.t_end and sample on the output grid."""
        return IntegratorService.integrate_ensemble(p, [x0], cfg)[0]

    @staticmethod
    def integrate_ensemble(
        p: ModelParameters, states: Sequence[State], cfg: Optional[IntegratorConfig] = None
    ) -> List[Trajectory]:
        """Integrate k initial states together as one (5, k) system."""
        cfg = cfg or IntegratorConfig()
        if not states:
            return []
        y0 = np.column_stack([x.as_array() for x in states])
        if not np.all(np.isfinite(y0)):
            raise ModelDomainError("initial state contains non-finite components")
        if np.any(y0 < 0):
            raise ModelDomainError("initial state has negative components")

        field = VectorFieldService.make_vector_field(p)
        times = cfg.sample_times()
        populations = y0.sum(axis=0)
        band = Config.NEGATIVITY_BAND * np.maximum(populations, 1.0)

        if cfg.method == IntegrationMethod.RK4:
            samples, accepted, rejected = IntegratorService._run_rk4(field, y0, cfg, times, band)
        else:
            atol = cfg.abs_tol if cfg.abs_tol is not None else Config.DP45_ATOL_SCALE * np.maximum(populations, 1.0)
            samples, accepted, rejected = IntegratorService._run_dp45(field, y0, cfg, times, band, atol)

        logger.debug(
            f"{cfg.method.value}: t_end={cfg.t_end}, members={len(states)}, accepted={accepted}, rejected={rejected}"
        )
        return [
            Trajectory(
                times=times,
                states=samples[:, :, j],
                parameters=p,
                accepted_steps=accepted,
                rejected_steps=rejected,
                method=cfg.method.value,
            )
            for j in range(len(states))
        ]

    @staticmethod
    def _run_rk4(
        field: VectorField, y0: np.ndarray, cfg: IntegratorConfig, times: np.ndarray, band: np.ndarray
    ) -> Tuple[np.ndarray, int, int]:
        sampler = _Sampler(times, y0)
        # step times come from the index so long runs do not accumulate drift
        count = max(1, int(math.ceil(cfg.t_end / cfg.h - 1e-9)))
        t, y = 0.0, y0
        f = field(y)
        steps = 0
        while not sampler.done and steps < count:
            t_next = cfg.t_end if steps + 1 == count else (steps + 1) * cfg.h
            h = t_next - t
            k1 = f
            k2 = field(y + 0.5 * h * k1)
            k3 = field(y + 0.5 * h * k2)
            k4 = field(y + h * k3)
            y_new = _clamp(y + (h / 6.0) * (k1 + 2.0 * k2 + 2.0 * k3 + k4), band)
            if y_new is None:
                raise IntegrationError("RK4 step produced a negative or non-finite compartment; reduce h", t_next)
            f_new = field(y_new)
            sampler.feed(t, y, f, t_next, y_new, f_new)
            t, y, f = t_next, y_new, f_new
            steps += 1
        return sampler.out, steps, 0

    @staticmethod
    def _initial_step(field: VectorField, y0: np.ndarray, f0: np.ndarray, scale: np.ndarray, cfg) -> float:
        d0 = np.max(np.abs(y0) / scale)
        d1 = np.max(np.abs(f0) / scale)
        h = 1e-6 if d0 < 1e-5 or d1 < 1e-5 else 0.01 * d0 / d1
        return float(min(max(h, cfg.h_min), cfg.h_max, max(cfg.t_end, cfg.h_min)))

    @staticmethod
    def _run_dp45(
        field: VectorField,
        y0: np.ndarray,
        cfg: IntegratorConfig,
        times: np.ndarray,
        band: np.ndarray,
        atol,
    ) -> Tuple[np.ndarray, int, int]:
        sampler = _Sampler(times, y0)
        rtol = cfg.rel_tol
        t, y = 0.0, y0
        k1 = field(y)
        h = IntegratorService._initial_step(field, y, k1, atol + rtol * np.abs(y), cfg)
        accepted = rejected = 0

        while not sampler.done and t < cfg.t_end:
            if accepted + rejected > MAX_STEPS:
                raise IntegrationError("maximum number of steps exhausted", t)
            last = t + h >= cfg.t_end * (1.0 - 1e-12)
            if last:
                h = cfg.t_end - t

            k2 = field(y + h * (A21 * k1))
            k3 = field(y + h * (A31 * k1 + A32 * k2))
            k4 = field(y + h * (A41 * k1 + A42 * k2 + A43 * k3))
            k5 = field(y + h * (A51 * k1 + A52 * k2 + A53 * k3 + A54 * k4))
            k6 = field(y + h * (A61 * k1 + A62 * k2 + A63 * k3 + A64 * k4 + A65 * k5))
            y_trial = y + h * (B1 * k1 + B3 * k3 + B4 * k4 + B5 * k5 + B6 * k6)
            y_new = _clamp(y_trial, band)

            if y_new is None:
                err = math.inf
            else:
                k7 = field(y_new)
                delta = h * (E1 * k1 + E3 * k3 + E4 * k4 + E5 * k5 + E6 * k6 + E7 * k7)
                scale = atol + rtol * np.maximum(np.abs(y), np.abs(y_new))
                err = float(np.max(np.abs(delta) / scale))

            if err <= 1.0:
                sampler.feed(t, y, k1, t + h, y_new, k7)
                t = cfg.t_end if last else t + h
                y, k1 = y_new, k7
                accepted += 1
                factor = MAX_FACTOR if err == 0.0 else min(MAX_FACTOR, max(MIN_FACTOR, SAFETY * err ** -0.2))
                h = min(h * factor, cfg.h_max)
            else:
                rejected += 1
                if math.isinf(err):
                    factor = 0.5
                else:
                    factor = min(1.0, max(MIN_FACTOR, SAFETY * err ** -0.2))
                h *= factor
                if h < cfg.h_min:
                    raise IntegrationError("step size fell below h_min without meeting tolerance", t)
        return sampler.out, accepted, rejected

    @staticmethod
    def rk4_errors(
        p: ModelParameters, x0: State, steps: Sequence[float], t_end: float
    ) -> List[float]:
        """Final-state RK4 errors for each step against a tight DP45 reference (relative to max |y|)."""
        reference_cfg = IntegratorConfig(
            method=IntegrationMethod.DORMAND_PRINCE45,
            rel_tol=1e-13,
            abs_tol=1e-13 * max(x0.total, 1.0),
            t_end=t_end,
            output_times=[0.0, t_end],
            h_max=min(Config.H_MAX, t_end),
        )
        reference = IntegratorService.integrate(p, x0, reference_cfg).states[-1]
        scale = max(float(np.max(np.abs(reference))), 1e-300)
        errors = []
        for h in steps:
            cfg = IntegratorConfig(method=IntegrationMethod.RK4, h=h, t_end=t_end, output_times=[0.0, t_end])
            final = IntegratorService.integrate(p, x0, cfg).states[-1]
            errors.append(float(np.max(np.abs(final - reference))) / scale)
        return errors

    @staticmethod
    def observed_order(p: ModelParameters, x0: State, h: float = 0.5, t_end: float = 50.0) -> float:
        """Empirical RK4 order log2(e_h / e_{h/2}).

        inf when only the half-step error vanishes, nan when both do.
        """
        e_h, e_half = IntegratorService.rk4_errors(p, x0, [h, h / 2.0], t_end)
        if e_half == 0.0:
            logger.warning(f"RK4 error vanished at h/2={h / 2.0}; no order estimate (e_h={e_h:.3e})")
            return math.inf if e_h > 0.0 else math.nan
        return math.log2(e_h / e_half)
