"""
Command-line application for the SVIR toolkit
"""
import argparse
import logging
import sys
from typing import Dict, List, Optional, Type

from app.handlers.analyze import AnalyzeHandler
from app.handlers.base import EXIT_USAGE, BaseHandler
from app.handlers.bifurcation import BifurcationHandler
from app.handlers.equilibria import EquilibriaHandler
from app.handlers.fit import FitHandler, SynthesizeHandler
from app.handlers.sensitivity import SensitivityHandler
from app.handlers.simulate import SimulateHandler

logger = logging.getLogger(__name__)


class UsageError(Exception):
    pass


class _Parser(argparse.ArgumentParser):
    """Raises UsageError instead of exiting so the CLI can map it to exit code 2"""

    def error(self, message):
        self.print_usage(sys.stderr)
        raise UsageError(f"{self.prog}: error: {message}")


class ToolkitCli:
    def __init__(self):
        self.parser = None
        self.handlers: Dict[str, Type[BaseHandler]] = {}
        self.setup_cli()

    def setup_cli(self):
        """Build the parser and register subcommands"""
        self.parser = _Parser(
            prog="svir",
            description="Two-strain SVIR model with an imperfect vaccine: simulation, "
            "equilibria, reproduction numbers, stability, bifurcation, sensitivity and calibration.",
        )
        self.subparsers = self.parser.add_subparsers(dest="command", metavar="COMMAND")
        self.add_handlers()

    def add_handlers(self):
        """Register one handler class per subcommand"""
        self.add_handler(SimulateHandler)
        self.add_handler(AnalyzeHandler)
        self.add_handler(FitHandler)
        self.add_handler(SensitivityHandler)
        self.add_handler(BifurcationHandler)
        self.add_handler(EquilibriaHandler)
        self.add_handler(SynthesizeHandler)

    def add_handler(self, handler: Type[BaseHandler]):
        parser = self.subparsers.add_parser(handler.command, help=handler.help, description=handler.help)
        handler.add_arguments(parser)
        self.handlers[handler.command] = handler

    def run(self, argv: Optional[List[str]] = None) -> int:
        try:
            args = self.parser.parse_args(argv)
        except UsageError as e:
            return BaseHandler.fail(EXIT_USAGE, str(e))
        if not args.command:
            self.parser.print_help()
            return EXIT_USAGE
        handler = self.handlers[args.command]
        logger.info(f"Command: {args.command}")
        return handler.run(args)


def run(argv: Optional[List[str]] = None) -> int:
    return ToolkitCli().run(argv)
