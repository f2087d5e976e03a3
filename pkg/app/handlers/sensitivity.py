"""
sensitivity: normalized forward sensitivity indices of R01 and R02
"""
import argparse

from app.handlers.base import EXIT_OK, BaseHandler
from app.models.run_config import RunConfig
from app.services.report_service import ReportService
from app.services.sensitivity_service import SensitivityService


class SensitivityHandler(BaseHandler):
    command = "sensitivity"
    help = "sensitivity indices of both reproduction numbers (JSON and CSV)"

    @classmethod
    def handle(cls, config: RunConfig, args: argparse.Namespace) -> int:
        report = SensitivityService.sensitivity_indices(config.model_parameters())
        out = cls.output_dir(config)
        ReportService.write_json(report, out / "sensitivity.json")
        ReportService.write_sensitivity_csv(report, out / "sensitivity.csv")

        cls.say(f"R01 = {report.r01:.6g}, R02 = {report.r02:.6g}")
        for entry in report.entries:
            cls.say(f"  {entry.parameter:<18} {entry.index_r01:+.4f} {entry.index_r02:+.4f}")
        return EXIT_OK
