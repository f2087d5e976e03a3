"""
simulate: trajectories, optional parameter sweep, peaks and an SVG chart
"""
import argparse
import logging

from app.handlers.base import EXIT_OK, BaseHandler, InputError
from app.models.parameters import COMPARTMENTS
from app.models.run_config import RunConfig
from app.services.plot_service import PlotService
from app.services.report_service import ReportService
from app.services.simulation_service import SimulationService
from app.utils.serialization import parse_sweep

logger = logging.getLogger(__name__)


class SimulateHandler(BaseHandler):
    command = "simulate"
    help = "integrate the model and write trajectory CSVs"

    @classmethod
    def add_arguments(cls, parser: argparse.ArgumentParser) -> None:
        super().add_arguments(parser)
        parser.add_argument(
            "--sweep", metavar="NAME=V1,V2,...", help="run one trajectory per value of a parameter (default: none)"
        )
        parser.add_argument("--svg", action="store_true", default=None, help="also write chart.svg (default: off)")
        parser.add_argument("--column", choices=COMPARTMENTS, help="compartment for peaks and chart (default: I2)")
        parser.add_argument("--log-y", action="store_true", default=None, help="logarithmic chart y-axis (default: off)")

    @classmethod
    def flag_changes(cls, args: argparse.Namespace) -> dict:
        changes = super().flag_changes(args)
        if args.sweep:
            try:
                name, values = parse_sweep(args.sweep)
            except ValueError as e:
                raise InputError(str(e)) from e
            changes["sweep"] = {"parameter": name, "values": values}
        for key in ("svg", "column", "log_y"):
            if getattr(args, key) is not None:
                changes[key] = getattr(args, key)
        return changes

    @classmethod
    def handle(cls, config: RunConfig, args: argparse.Namespace) -> int:
        p = config.model_parameters()
        out = cls.output_dir(config)
        x0, cfg = config.initial_conditions, config.integrator

        if config.sweep is None or not config.sweep.values:
            members = [(None, SimulationService.simulate(p, x0, cfg, label="baseline"))]
            parameter = None
        else:
            parameter = config.sweep.parameter
            members = SimulationService.run_sweep(p, x0, cfg, parameter, config.sweep.values)

        # single writer after all members finished
        peaks = {}
        series = []
        for value, trajectory in members:
            ReportService.write_trajectory(trajectory, out / ReportService.trajectory_filename(parameter, value))
            t_peak, v_peak = SimulationService.peak(trajectory, config.column)
            peaks[trajectory.label] = {"t_peak": t_peak, "value_peak": v_peak}
            series.append((trajectory.label, trajectory))
            cls.say(f"{trajectory.label}: peak {config.column} = {v_peak:.6g} at t = {t_peak:g}")

        ReportService.write_peaks({"column": config.column, "peaks": peaks}, out / "peaks.json")
        if config.svg:
            title = f"{config.column} vs t" + (f" ({parameter} sweep)" if parameter else "")
            PlotService.line_chart(series, config.column, out / "chart.svg", log_y=config.log_y, title=title)
        return EXIT_OK
