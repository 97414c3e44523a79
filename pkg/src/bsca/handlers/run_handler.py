import argparse
import logging
from typing import Any

import pandas as pd

from bsca.config import settings
from bsca.handlers.base_handler import BaseHandler, add_config_arguments, load_config
from bsca.render import figures
from bsca.services import analysis_service

logger = logging.getLogger(__name__)


def gate_grid(document: dict[str, Any]) -> pd.DataFrame:
    """Treatment x outcome grid of posterior summaries, GATE rows included."""
    rows = []
    for outcome, entry in document["outcomes"].items():
        for name, item in entry["coefficients"].items():
            if item["kind"] == "treatment":
                rows.append({"treatment": name, "outcome": outcome, **_cell(item)})
    gate = document.get("gate")
    if gate:
        for name, item in gate["by_treatment"].items():
            rows.append({"treatment": name, "outcome": "GATE", **_cell(item)})
        rows.append({"treatment": "all", "outcome": "GATE", **_cell(gate)})
    return pd.DataFrame(
        rows,
        columns=["treatment", "outcome", "mean", "lower", "upper", "p_inc", "reject"],
    )


def _cell(item: dict[str, Any]) -> dict[str, Any]:
    return {key: item[key] for key in ("mean", "lower", "upper", "p_inc", "reject")}


class RunHandler(BaseHandler):
    """Model-averaged analysis of every outcome with its figures."""

    command = "run"
    help = "Explore the model space, average the coefficients and write the results"

    def add_arguments(self, parser: argparse.ArgumentParser) -> None:
        add_config_arguments(parser)
        parser.add_argument("--engine", choices=["enumerate", "gibbs"])
        parser.add_argument("--iters", type=int, help="Gibbs sweeps")
        parser.add_argument("--burnin", type=int, help="Gibbs sweeps discarded")
        parser.add_argument("--gamma", type=float, help="EBIC constant")
        parser.add_argument("--threshold", type=float, help="Inclusion probability cutoff")
        parser.add_argument("--draws", type=int, help="Posterior draws per coefficient")
        parser.add_argument("--top-models", type=int, help="Models shown in the figures")

    def execute(self, args: argparse.Namespace) -> dict[str, Any]:
        config = load_config(
            args,
            engine={"kind": args.engine, "iters": args.iters, "burnin": args.burnin},
            gamma=args.gamma,
            threshold=args.threshold,
            draws=args.draws,
            top_models=args.top_models,
        )
        repository = self.create_repository(config.output_dir)

        result = analysis_service.run_analysis(config)
        models = analysis_service.models_frame(result)
        document = analysis_service.coefficients_document(result)
        repository.stage_frame("models.csv", models)
        repository.stage_json("coefficients.json", document)
        if len(document["outcomes"]) > 1:
            repository.stage_frame("multi_outcome.csv", gate_grid(document))

        # Figures are drawn from the serialized numbers, as `plot` would.
        top_models = settings.top_models if config.top_models is None else config.top_models
        for name, svg in figures.run_figures(document, models, top_models).items():
            repository.stage_text(name, svg)

        written = repository.commit()
        logger.info(f"Run finished: {len(written)} files in {config.output_dir}")
        return {
            "output_dir": str(config.output_dir),
            "files": [path.name for path in written],
            "outcomes": list(document["outcomes"]),
            "errors": document["errors"],
        }
