"""
fit and synthesize: calibration against a case series and synthetic data
"""
import argparse
import logging
from pathlib import Path

from app.handlers.base import EXIT_OK, BaseHandler, InputError
from app.models.case_series import ObservableKind
from app.models.parameters import FIT_INITIAL_GUESS
from app.models.run_config import RunConfig, canonical_parameter
from app.services.calibration_service import CalibrationService
from app.services.report_service import ReportService
from app.utils.serialization import parse_overrides

logger = logging.getLogger(__name__)

OBSERVABLES = {
    "active": ObservableKind.ACTIVE_INFECTED_TOTAL,
    "daily": ObservableKind.DAILY_NEW_INFECTIONS,
}


def add_observable_argument(parser: argparse.ArgumentParser) -> None:
    parser.add_argument(
        "--observable",
        choices=sorted(OBSERVABLES),
        help="active: I1+I2 on each day; daily: new infections per day (default: active)",
    )


def observable_change(args: argparse.Namespace, changes: dict) -> dict:
    if args.observable is not None:
        changes["observable"] = OBSERVABLES[args.observable]
    return changes


class FitHandler(BaseHandler):
    command = "fit"
    help = "estimate transmission and mutation rates from a day,observed CSV"

    @classmethod
    def add_arguments(cls, parser: argparse.ArgumentParser) -> None:
        super().add_arguments(parser)
        parser.add_argument("--data", metavar="CSV", help="case series with header day,observed (required)")
        add_observable_argument(parser)
        parser.add_argument(
            "--free",
            metavar="NAME,...",
            help=f"parameters to estimate, empty for none (default: {','.join(FIT_INITIAL_GUESS)})",
        )
        parser.add_argument(
            "--guess",
            action="append",
            default=[],
            metavar="NAME=VALUE",
            help="starting value of a free parameter, repeatable (defaults: "
            + ", ".join(f"{k}={v:g}" for k, v in FIT_INITIAL_GUESS.items())
            + ")",
        )
        parser.add_argument("--max-evals", type=int, help="maximum objective evaluations (default: from config)")

    @classmethod
    def flag_changes(cls, args: argparse.Namespace) -> dict:
        changes = observable_change(args, super().flag_changes(args))
        if args.data is not None:
            changes["data"] = args.data
        fit = {}
        if args.free is not None:
            fit["free_parameters"] = [canonical_parameter(n) for n in args.free.split(",") if n.strip()]
        if args.guess:
            fit["initial_guess"] = {canonical_parameter(k): v for k, v in parse_overrides(args.guess).items()}
        if args.max_evals is not None:
            fit["max_evals"] = args.max_evals
        if fit:
            changes["fit"] = fit
        return changes

    @classmethod
    def handle(cls, config: RunConfig, args: argparse.Namespace) -> int:
        if not config.data:
            raise InputError("fit needs a case series (--data PATH)")
        series = CalibrationService.read_case_series(Path(config.data), config.observable)
        out = cls.output_dir(config)
        result = CalibrationService.fit(series, config.fit, config.model_parameters(), config.initial_conditions)
        ReportService.write_fit(result, series, out)

        fitted = {name: result.fitted[name] for name in config.fit.free_parameters}
        cls.say(f"converged={result.converged} objective={result.objective:.6g} evaluations={result.evaluations}")
        for name, value in fitted.items():
            cls.say(f"  {name} = {value:.10g}")
        return EXIT_OK


class SynthesizeHandler(BaseHandler):
    command = "synthesize"
    help = "write a synthetic day,observed case series generated by the model"

    @classmethod
    def add_arguments(cls, parser: argparse.ArgumentParser) -> None:
        super().add_arguments(parser)
        parser.add_argument("--days", type=int, help="number of daily samples, day 0 included (default: 43)")
        parser.add_argument("--noise", type=float, help="relative lognormal noise level (default: 0)")
        add_observable_argument(parser)
        parser.add_argument("--data", metavar="CSV", help="output file (default: <out>/cases.csv)")

    @classmethod
    def flag_changes(cls, args: argparse.Namespace) -> dict:
        changes = observable_change(args, super().flag_changes(args))
        for key in ("days", "noise", "data"):
            if getattr(args, key) is not None:
                changes[key] = getattr(args, key)
        return changes

    @classmethod
    def handle(cls, config: RunConfig, args: argparse.Namespace) -> int:
        series = CalibrationService.generate_synthetic(
            config.model_parameters(),
            config.initial_conditions,
            config.days,
            noise_rel=config.noise,
            seed=config.seed,
            observable_kind=config.observable,
        )
        path = Path(config.data) if config.data else cls.output_dir(config) / "cases.csv"
        CalibrationService.write_case_series(series, path)
        logger.info(f"Wrote {path}")
        cls.say(f"wrote {len(series.days)} days of {series.observable_kind.value} to {path}")
        return EXIT_OK
