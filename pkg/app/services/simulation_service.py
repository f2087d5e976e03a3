"""
Simulation runs: single trajectories, parameter sweeps and the summary
statistics (peaks, extinction times) read off them.
"""
import logging
from concurrent.futures import ThreadPoolExecutor
from typing import List, Optional, Sequence, Tuple

import numpy as np

from app.config import Config
from app.models.parameters import PARAMETER_NAMES, ModelParameters, State
from app.models.trajectory import IntegratorConfig, Trajectory
from app.services.integrator_service import IntegratorService

logger = logging.getLogger(__name__)

SweepMember = Tuple[float, Trajectory]


class SimulationService:
    @staticmethod
    def simulate(p: ModelParameters, x0: State, cfg: IntegratorConfig, label: str = "") -> Trajectory:
        trajectory = IntegratorService.integrate(p, x0, cfg)
        trajectory.label = label
        return trajectory

    @staticmethod
    def run_sweep(
        p: ModelParameters,
        x0: State,
        cfg: IntegratorConfig,
        parameter: str,
        values: Sequence[float],
        workers: Optional[int] = None,
    ) -> List[SweepMember]:
        """One trajectory per value of `parameter`, computed on a thread pool.

        Results come back in the order of `values`.
        """
        if parameter not in PARAMETER_NAMES:
            raise ValueError(f"unknown sweep parameter '{parameter}'")
        members = [(float(value), p.replace(**{parameter: float(value)})) for value in values]
        workers = workers or Config.SWEEP_WORKERS

        def run(member: Tuple[float, ModelParameters]) -> SweepMember:
            value, params = member
            logger.info(f"Sweep member {parameter}={value:g} started")
            trajectory = SimulationService.simulate(params, x0, cfg, label=f"{parameter}={value:g}")
            logger.info(f"Sweep member {parameter}={value:g} finished ({trajectory.accepted_steps} steps)")
            return value, trajectory

        with ThreadPoolExecutor(max_workers=max(1, workers)) as pool:
            return list(pool.map(run, members))

    @staticmethod
    def peak(trajectory: Trajectory, column: str) -> Tuple[float, float]:
        """(t_peak, value_peak) by discrete argmax over output samples."""
        values = trajectory.column(column)
        index = int(np.argmax(values))
        return float(trajectory.times[index]), float(values[index])

    @staticmethod
    def extinction_time(
        trajectory: Trajectory, column: str, threshold: Optional[float] = None
    ) -> Optional[float]:
        """First output time at or after the peak where `column` drops below threshold."""
        threshold = Config.EXTINCTION_THRESHOLD if threshold is None else threshold
        values = trajectory.column(column)
        start = int(np.argmax(values))
        below = np.nonzero(values[start:] < threshold)[0]
        if below.size == 0:
            return None
        return float(trajectory.times[start + below[0]])
