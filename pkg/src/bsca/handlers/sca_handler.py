import argparse
import logging
from typing import Any

import pandas as pd

from bsca.handlers.base_handler import BaseHandler, add_config_arguments, load_config
from bsca.render import figures
from bsca.services import analysis_service, sca_service

logger = logging.getLogger(__name__)


class ScaHandler(BaseHandler):
    """Classical specification curve with its median test."""

    command = "sca"
    help = "Fit the specification curve and test its median"

    def add_arguments(self, parser: argparse.ArgumentParser) -> None:
        add_config_arguments(parser)
        parser.add_argument("--method", choices=["bootstrap", "permutation"])
        parser.add_argument("--draws", type=int, help="Resampling draws of the median test")

    def execute(self, args: argparse.Namespace) -> dict[str, Any]:
        config = load_config(args, sca={"method": args.method, "draws": args.draws})
        repository = self.create_repository(config.output_dir)

        curve, test = analysis_service.run_sca(config)
        frame = pd.DataFrame(sca_service.curve_rows(curve))
        document = analysis_service.median_test_document(curve, test)
        repository.stage_frame("curve.csv", frame)
        repository.stage_json("median_test.json", document)
        repository.stage_text("sca.svg", figures.sca(frame, curve.median, document))

        written = repository.commit()
        logger.info(f"Specification curve written to {config.output_dir}")
        return {
            "output_dir": str(config.output_dir),
            "files": [path.name for path in written],
            "median": curve.median,
            "p_value": test.p_value,
        }
