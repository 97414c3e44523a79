import argparse
import logging
from pathlib import Path
from typing import Any

from bsca.config import settings
from bsca.exceptions import StorageError
from bsca.handlers.base_handler import BaseHandler
from bsca.render import figures

logger = logging.getLogger(__name__)


class PlotHandler(BaseHandler):
    """Redraw the figures of an earlier run from its saved tables."""

    command = "plot"
    help = "Re-render figures from the CSV and JSON files of a run directory"

    def add_arguments(self, parser: argparse.ArgumentParser) -> None:
        parser.add_argument("--out", type=Path, required=True, help="Run output directory")
        parser.add_argument("--top-models", type=int, help="Models shown in the figures")

    def execute(self, args: argparse.Namespace) -> dict[str, Any]:
        repository = self.create_repository(args.out)
        rendered = False
        if repository.exists("coefficients.json") and repository.exists("models.csv"):
            document = repository.read_json("coefficients.json")
            models = repository.read_frame("models.csv")
            top_models = settings.top_models if args.top_models is None else args.top_models
            for name, svg in figures.run_figures(document, models, top_models).items():
                repository.stage_text(name, svg)
            rendered = True
        if repository.exists("curve.csv") and repository.exists("median_test.json"):
            test = repository.read_json("median_test.json")
            curve = repository.read_frame("curve.csv")
            repository.stage_text("sca.svg", figures.sca(curve, test["observed_median"], test))
            rendered = True
        if not rendered:
            raise StorageError(f"No saved results to plot in {args.out}")

        written = repository.commit()
        logger.info(f"Re-rendered {len(written)} figures in {args.out}")
        return {"output_dir": str(args.out), "files": [path.name for path in written]}
