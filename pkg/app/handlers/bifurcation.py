"""
bifurcation: threshold transmission rates, normal-form constants and regime
"""
import argparse

from app.handlers.base import EXIT_OK, BaseHandler
from app.models.run_config import RunConfig
from app.services.bifurcation_service import BifurcationService
from app.services.report_service import ReportService


class BifurcationHandler(BaseHandler):
    command = "bifurcation"
    help = "bifurcation analysis at beta1* and beta2*"

    @classmethod
    def add_arguments(cls, parser: argparse.ArgumentParser) -> None:
        super().add_arguments(parser)
        parser.add_argument("--strain", type=int, choices=(1, 2), help="analyse one strain only (default: both)")

    @classmethod
    def handle(cls, config: RunConfig, args: argparse.Namespace) -> int:
        p = config.model_parameters()
        strains = (args.strain,) if args.strain else (1, 2)
        document = {}
        for strain in strains:
            report = BifurcationService.analyze(p, strain)
            document[f"strain{strain}"] = report
            cls.say(
                f"strain {strain}: beta*={report.beta_star:.10g} a={report.a:.6g} b={report.b:.6g} "
                f"delta*={report.delta_star:.6g} regime={report.regime.value}"
            )
        ReportService.write_json(document, cls.output_dir(config) / "bifurcation.json")
        return EXIT_OK
