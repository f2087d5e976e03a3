"""
Report service for the SVIR toolkit: writes JSON documents and CSV tables
into an output directory.
"""
import json
import logging
from pathlib import Path
from typing import Any, Dict, List, Optional

from app.config import Config
from app.models.case_series import CaseSeries, FitResult
from app.models.reports import SensitivityReport
from app.models.trajectory import Trajectory
from app.utils.serialization import format_value, to_jsonable

logger = logging.getLogger(__name__)


class ReportService:
    @staticmethod
    def ensure_output_dir(out: Optional[str] = None) -> Path:
        """Create the output directory if needed"""
        path = Path(out or Config.get_output_dir())
        path.mkdir(parents=True, exist_ok=True)
        return path

    @staticmethod
    def write_json(document: Any, path) -> Path:
        path = Path(path)
        with open(path, "w", encoding="utf-8") as f:
            json.dump(to_jsonable(document), f, indent=2, sort_keys=False, allow_nan=False)
            f.write("\n")
        logger.info(f"Wrote {path}")
        return path

    @staticmethod
    def trajectory_filename(parameter: Optional[str] = None, value: Optional[float] = None) -> str:
        """trajectory.csv, or trajectory_<name>_<value>.csv for a sweep member"""
        if parameter is None:
            return "trajectory.csv"
        return f"trajectory_{parameter}_{format_value(value)}.csv"

    @staticmethod
    def write_trajectory(trajectory: Trajectory, path) -> Path:
        path = Path(path)
        trajectory.to_csv(path)
        logger.info(f"Wrote {path} ({len(trajectory)} rows)")
        return path

    @staticmethod
    def write_peaks(peaks: Dict[str, Dict[str, float]], path) -> Path:
        return ReportService.write_json(peaks, path)

    @staticmethod
    def write_sensitivity_csv(report: SensitivityReport, path) -> Path:
        """Header parameter,value,index_r01,index_r02"""
        path = Path(path)
        report.to_frame().to_csv(path, index=False, float_format="%.17g")
        logger.info(f"Wrote {path}")
        return path

    @staticmethod
    def write_fit(result: FitResult, series: CaseSeries, out: Path) -> List[Path]:
        """fit_result.json plus the day,observed,predicted comparison CSV"""
        json_path = ReportService.write_json(result, out / "fit_result.json")
        csv_path = out / "fit_comparison.csv"
        result.comparison_frame(series).to_csv(csv_path, index=False, float_format="%.17g")
        logger.info(f"Wrote {csv_path}")
        return [json_path, csv_path]
