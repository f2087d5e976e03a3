"""
Base handler for the SVIR toolkit subcommands
"""
import argparse
import json
import logging
import sys
from pathlib import Path

from pydantic import ValidationError

from app.config import Config
from app.exceptions import CaseSeriesError, ToolkitError
from app.models.parameters import DEFAULT_INITIAL_STATE, DEFAULT_PARAMETERS, PARAMETER_NAMES, PARAMETER_SYMBOLS
from app.models.run_config import RunConfig
from app.models.trajectory import IntegrationMethod
from app.services.report_service import ReportService
from app.utils.serialization import parse_overrides

logger = logging.getLogger(__name__)

EXIT_OK = 0
EXIT_ANALYSIS_FAILURE = 1
EXIT_USAGE = 2


class InputError(ToolkitError):
    """Unusable command-line or config-file input"""


def _parameter_defaults() -> str:
    values = DEFAULT_PARAMETERS.model_dump()
    return ", ".join(f"{name} ({PARAMETER_SYMBOLS[name]})={values[name]:g}" for name in PARAMETER_NAMES)


def _state_defaults() -> str:
    return ", ".join(f"{k}={v:g}" for k, v in DEFAULT_INITIAL_STATE.model_dump().items())


class BaseHandler:
    command = ""
    help = ""

    @classmethod
    def add_arguments(cls, parser: argparse.ArgumentParser) -> None:
        """Flags shared by every subcommand; subclasses extend this"""
        parser.add_argument("--config", metavar="PATH", help="JSON run configuration (default: none)")
        parser.add_argument(
            "--param",
            action="append",
            default=[],
            metavar="NAME=VALUE",
            help=f"override a model parameter, repeatable (defaults: {_parameter_defaults()})",
        )
        parser.add_argument(
            "--init",
            action="append",
            default=[],
            metavar="COMPARTMENT=VALUE",
            help=f"override an initial condition, repeatable (defaults: {_state_defaults()})",
        )
        parser.add_argument("--out", metavar="DIR", help=f"output directory (default: {Config.get_output_dir()})")
        parser.add_argument("--seed", type=int, metavar="N", help="random seed (default: none)")
        parser.add_argument(
            "--method",
            choices=[m.value for m in IntegrationMethod],
            help=f"integration method (default: {IntegrationMethod.DORMAND_PRINCE45.value})",
        )
        parser.add_argument("--t-end", type=float, metavar="DAYS", help=f"horizon in days (default: {Config.DEFAULT_T_END:g})")
        parser.add_argument("--rtol", type=float, help=f"DP45 relative tolerance (default: {Config.DP45_RTOL:g})")
        parser.add_argument("--atol", type=float, help=f"DP45 absolute tolerance (default: {Config.DP45_ATOL_SCALE:g} x N(0))")
        parser.add_argument("--step", type=float, metavar="H", help=f"RK4 step in days (default: {Config.RK4_STEP:g})")
        parser.add_argument(
            "--output-step", type=float, metavar="DAYS", help=f"output sampling step (default: {Config.OUTPUT_STEP:g})"
        )

    @classmethod
    def flag_changes(cls, args: argparse.Namespace) -> dict:
        """Config changes requested on the command line"""
        changes = {}
        if args.param:
            changes["parameters"] = parse_overrides(args.param)
        if args.init:
            changes["initial_conditions"] = parse_overrides(args.init)
        if args.out is not None:
            changes["out"] = args.out
        if args.seed is not None:
            changes["seed"] = args.seed
        integrator = {
            key: value
            for key, value in (
                ("method", args.method),
                ("t_end", args.t_end),
                ("rel_tol", args.rtol),
                ("abs_tol", args.atol),
                ("h", args.step),
                ("output_step", args.output_step),
            )
            if value is not None
        }
        if integrator:
            changes["integrator"] = integrator
        return changes

    @classmethod
    def load_config(cls, args: argparse.Namespace) -> RunConfig:
        """Defaults < JSON config file < command-line flags"""
        config = RunConfig()
        if getattr(args, "config", None):
            path = Path(args.config)
            try:
                document = json.loads(path.read_text(encoding="utf-8"))
            except OSError as e:
                raise InputError(f"cannot read config {path}: {e}") from e
            except json.JSONDecodeError as e:
                raise InputError(f"config {path} is not valid JSON: {e}") from e
            if not isinstance(document, dict):
                raise InputError(f"config {path} must hold a JSON object")
            config = RunConfig.model_validate(document)
        try:
            changes = cls.flag_changes(args)
        except ValueError as e:
            raise InputError(str(e)) from e
        return config.merged(changes) if changes else config

    @classmethod
    def output_dir(cls, config: RunConfig) -> Path:
        return ReportService.ensure_output_dir(config.out)

    @classmethod
    def handle(cls, config: RunConfig, args: argparse.Namespace) -> int:
        raise NotImplementedError

    @classmethod
    def run(cls, args: argparse.Namespace) -> int:
        """Load config, run the subcommand and map failures to exit codes"""
        try:
            config = cls.load_config(args)
        except (ToolkitError, ValidationError, ValueError) as e:
            return cls.fail(EXIT_USAGE, f"invalid configuration: {e}")

        logger.info(f"Running '{cls.command}' with output directory {config.out}")
        try:
            return cls.handle(config, args)
        except (CaseSeriesError, InputError) as e:
            return cls.fail(EXIT_USAGE, str(e))
        except ToolkitError as e:
            return cls.fail(EXIT_ANALYSIS_FAILURE, f"{cls.command} failed: {e}")
        except (ValidationError, ValueError) as e:
            return cls.fail(EXIT_USAGE, f"invalid input: {e}")
        except OSError as e:
            return cls.fail(EXIT_USAGE, f"cannot write output: {e}")

    @staticmethod
    def fail(code: int, message: str) -> int:
        logger.error(message)
        print(f"error: {message}", file=sys.stderr)
        return code

    @staticmethod
    def say(message: str) -> None:
        print(message)
