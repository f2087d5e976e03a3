"""
Line charts of trajectory columns rendered to SVG.
"""
import logging
from pathlib import Path
from typing import List, Tuple

import matplotlib

matplotlib.use("Agg")
import matplotlib.pyplot as plt  # noqa: E402

from app.models.trajectory import Trajectory  # noqa: E402

logger = logging.getLogger(__name__)

# fixed element ids and no timestamp keep the SVG bytes reproducible
SVG_HASH_SALT = "svir-toolkit"


class PlotService:
    @staticmethod
    def line_chart(
        series: List[Tuple[str, Trajectory]],
        column: str,
        path,
        log_y: bool = False,
        title: str = "",
    ) -> Path:
        """One line per (label, trajectory) of `column` against t."""
        path = Path(path)
        with plt.rc_context({"svg.hashsalt": SVG_HASH_SALT, "svg.fonttype": "path"}):
            fig, ax = plt.subplots(figsize=(8, 5))
            try:
                for label, trajectory in series:
                    values = trajectory.column(column)
                    if log_y:
                        # log axis cannot show zeros
                        values = values.clip(min=1e-12)
                    ax.plot(trajectory.times, values, label=label or column, linewidth=1.2)
                if log_y:
                    ax.set_yscale("log")
                ax.set_xlabel("t (days)")
                ax.set_ylabel(column)
                if title:
                    ax.set_title(title)
                ax.grid(True, alpha=0.3)
                ax.legend()
                fig.savefig(path, format="svg", metadata={"Date": None})
            finally:
                plt.close(fig)
        logger.info(f"Wrote {path}")
        return path
