"""
equilibria: disease-free and endemic steady states with their stability
"""
import argparse
import logging

from app.exceptions import NoEndemicEquilibriumError
from app.handlers.base import EXIT_OK, BaseHandler
from app.models.parameters import State
from app.models.run_config import RunConfig
from app.services.equilibrium_service import EquilibriumService
from app.services.report_service import ReportService
from app.services.stability_service import StabilityService

logger = logging.getLogger(__name__)


class EquilibriaHandler(BaseHandler):
    command = "equilibria"
    help = "locate the disease-free and endemic equilibria and classify them"

    @classmethod
    def add_arguments(cls, parser: argparse.ArgumentParser) -> None:
        super().add_arguments(parser)
        parser.add_argument(
            "--from-initial",
            action="store_true",
            help="start Newton at the initial conditions instead of a long warm-up run (default: off)",
        )

    @classmethod
    def handle(cls, config: RunConfig, args: argparse.Namespace) -> int:
        p = config.model_parameters()
        out = cls.output_dir(config)

        dfe = EquilibriumService.disease_free(p)
        document = {"disease_free": dfe, "disease_free_stability": StabilityService.classify(p, dfe)}
        cls.say(f"disease-free: S0={dfe.state.S:.10g} V0={dfe.state.V:.10g}")

        guess: State = config.initial_conditions if args.from_initial else None
        try:
            endemic = EquilibriumService.endemic(p, guess)
        except NoEndemicEquilibriumError as e:
            logger.info(f"No endemic equilibrium: {e}")
            document.update({"endemic": None, "endemic_note": str(e)})
            cls.say(f"endemic: none ({e})")
        else:
            stability = StabilityService.classify(p, endemic)
            document.update({"endemic": endemic, "endemic_stability": stability})
            s = endemic.state
            cls.say(
                f"endemic: S={s.S:.10g} V={s.V:.10g} I1={s.I1:.10g} I2={s.I2:.10g} R={s.R:.10g} "
                f"({stability.classification.value})"
            )

        ReportService.write_json(document, out / "equilibria.json")
        return EXIT_OK
