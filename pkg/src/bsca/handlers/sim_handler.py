import argparse
import json
import logging
from pathlib import Path
from typing import Any

from pydantic import ValidationError

from bsca.exceptions import ConfigurationError
from bsca.handlers.base_handler import BaseHandler
from bsca.models.simulation import SimScenario
from bsca.services import simulation_service

logger = logging.getLogger(__name__)


class SimHandler(BaseHandler):
    """Monte Carlo comparison of model averaging and the specification curve."""

    command = "sim"
    help = "Run seeded simulation scenarios and write their result tables"

    def add_arguments(self, parser: argparse.ArgumentParser) -> None:
        source = parser.add_mutually_exclusive_group()
        source.add_argument(
            "--scenario", help="Scenario id, '5' for both multi-outcome cases, or 'all'"
        )
        source.add_argument("--scenario-file", type=Path, help="JSON file with a custom scenario")
        parser.add_argument("--seed", type=int, help="Master seed (required)")
        parser.add_argument("--out", type=Path, default=Path("bsca-sim"), help="Output directory")
        parser.add_argument("--replicates", type=int)
        parser.add_argument("--n", type=int, help="Rows per replicate")
        parser.add_argument("--method", choices=["bootstrap", "permutation"])
        parser.add_argument("--draws", type=int, help="Resampling draws of the SCA median test")

    def _overrides(self, args: argparse.Namespace) -> dict[str, Any]:
        values = {
            "replicates": args.replicates,
            "n": args.n,
            "sca_method": args.method,
            "sca_draws": args.draws,
        }
        return {key: value for key, value in values.items() if value is not None}

    def scenarios(self, args: argparse.Namespace) -> list[SimScenario]:
        """
        Resolve the requested scenarios.

        Raises:
            ConfigurationError: Without a seed, a scenario, or with an invalid scenario file
        """
        if args.seed is None:
            raise ConfigurationError("A master seed is required (--seed)")
        overrides = self._overrides(args)
        try:
            if args.scenario_file is not None:
                document = json.loads(args.scenario_file.read_text(encoding="utf-8"))
                if not isinstance(document, dict):
                    raise ConfigurationError("A scenario file must hold a JSON object")
                document.update(overrides, master_seed=args.seed)
                return [SimScenario.model_validate(document)]
            if args.scenario is None:
                raise ConfigurationError("Choose --scenario or --scenario-file")
            return [
                simulation_service.scenario(name, args.seed, **overrides)
                for name in simulation_service.scenario_names(args.scenario)
            ]
        except (OSError, json.JSONDecodeError) as error:
            raise ConfigurationError(f"Cannot read scenario file: {error}") from error
        except ValidationError as error:
            raise ConfigurationError(f"Invalid scenario: {error}") from error

    def execute(self, args: argparse.Namespace) -> dict[str, Any]:
        scenarios = self.scenarios(args)
        repository = self.create_repository(args.out)
        summary = {}
        for scenario in scenarios:
            report = simulation_service.run_scenario(scenario)
            csv_text, text_table = simulation_service.emit_tables(report)
            repository.stage_text(f"sim_{scenario.name}.csv", csv_text)
            repository.stage_text(f"sim_{scenario.name}.txt", text_table)
            summary[scenario.name] = {
                "rows": len(report.rows),
                "runtime_seconds": round(report.runtime_seconds, 3),
            }
        written = repository.commit()
        return {
            "output_dir": str(args.out),
            "files": [path.name for path in written],
            "scenarios": summary,
        }
