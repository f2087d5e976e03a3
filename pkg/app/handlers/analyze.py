"""
analyze: every analysis in one JSON bundle, failures recorded per section
"""
import argparse
import logging
from typing import Any, Callable, Dict

from app.exceptions import NoEndemicEquilibriumError, ToolkitError
from app.handlers.base import EXIT_ANALYSIS_FAILURE, EXIT_OK, BaseHandler
from app.models.run_config import RunConfig
from app.services.bifurcation_service import BifurcationService
from app.services.equilibrium_service import EquilibriumService
from app.services.report_service import ReportService
from app.services.reproduction_service import ReproductionService
from app.services.sensitivity_service import SensitivityService
from app.services.stability_service import StabilityService

logger = logging.getLogger(__name__)


class AnalyzeHandler(BaseHandler):
    command = "analyze"
    help = "equilibria, R0, stability, sensitivity and bifurcation in one report"

    @staticmethod
    def _section(bundle: Dict[str, Any], failures: Dict[str, str], name: str, compute: Callable[[], Any]) -> Any:
        try:
            value = compute()
        except (ToolkitError, ArithmeticError, ValueError) as e:
            logger.error(f"Section '{name}' failed: {e}")
            failures[name] = f"{type(e).__name__}: {e}"
            bundle[name] = None
            return None
        bundle[name] = value
        return value

    @classmethod
    def handle(cls, config: RunConfig, args: argparse.Namespace) -> int:
        p = config.model_parameters()
        out = cls.output_dir(config)
        bundle: Dict[str, Any] = {"parameters": p.model_dump()}
        failures: Dict[str, str] = {}

        equilibria: Dict[str, Any] = {}
        dfe = cls._section(equilibria, failures, "disease_free", lambda: EquilibriumService.disease_free(p))
        endemic = None
        try:
            endemic = EquilibriumService.endemic(p)
            equilibria["endemic"] = endemic
        except NoEndemicEquilibriumError as e:
            # a missing endemic state is a finding, not a failed section
            logger.info(f"No endemic equilibrium: {e}")
            equilibria["endemic"] = None
            equilibria["endemic_note"] = str(e)
        except (ToolkitError, ArithmeticError, ValueError) as e:
            logger.error(f"Section 'endemic' failed: {e}")
            failures["endemic"] = f"{type(e).__name__}: {e}"
            equilibria["endemic"] = None
        bundle["equilibria"] = equilibria

        cls._section(bundle, failures, "reproduction_numbers", lambda: ReproductionService.reproduction_numbers(p))

        stability: Dict[str, Any] = {}
        if dfe is not None:
            cls._section(stability, failures, "disease_free", lambda: StabilityService.classify(p, dfe))
        if endemic is not None:
            cls._section(stability, failures, "endemic", lambda: StabilityService.classify(p, endemic))
        bundle["stability"] = stability

        cls._section(bundle, failures, "sensitivity", lambda: SensitivityService.sensitivity_indices(p))

        bifurcation: Dict[str, Any] = {}
        for strain in (1, 2):
            cls._section(bifurcation, failures, f"strain{strain}", lambda s=strain: BifurcationService.analyze(p, s))
        bundle["bifurcation"] = bifurcation

        bundle["failures"] = failures
        ReportService.write_json(bundle, out / "analysis.json")

        numbers = bundle.get("reproduction_numbers")
        if numbers is not None:
            cls.say(f"R01 = {numbers.r01:.6g}, R02 = {numbers.r02:.6g}")
        if "disease_free" in stability:
            cls.say(f"disease-free state: {stability['disease_free'].classification.value}")
        if failures:
            cls.say(f"{len(failures)} section(s) failed: {', '.join(failures)}")
            return EXIT_ANALYSIS_FAILURE
        return EXIT_OK
