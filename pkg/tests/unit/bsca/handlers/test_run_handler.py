import json
from unittest import mock

import pytest

from bsca.exceptions import NoValidModelError
from bsca.handlers.base_handler import EXIT_ERROR, EXIT_OK, EXIT_USAGE
from bsca.handlers.run_handler import RunHandler, gate_grid


@pytest.fixture
def run(cli):
    parser, subparsers = cli
    RunHandler(subparsers)

    def invoke(*argv):
        args = parser.parse_args(["run", *map(str, argv)])
        return args.handler.handle(args)

    return invoke


def test_writes_results_and_figures(run, config_path, tmp_path):
    code, record = run("--config", config_path(), "--out", tmp_path / "result")
    assert code == EXIT_OK
    assert record["files"] == ["models.csv", "coefficients.json", "single_outcome_y.svg"]
    assert record["outcomes"] == ["y"]
    document = json.loads((tmp_path / "result" / "coefficients.json").read_text("utf-8"))
    assert document["metadata"]["seed"] == 17


def test_flags_override_the_configuration(run, config_path, tmp_path):
    with mock.patch(
        "bsca.handlers.run_handler.analysis_service.run_analysis",
        side_effect=NoValidModelError("Every outcome failed"),
    ) as run_analysis:
        code, record = run(
            "--config", config_path(), "--engine", "gibbs", "--iters", "40", "--burnin", "5",
            "--gamma", "0.5", "--seed", "9", "--out", tmp_path / "o",
        )
    config = run_analysis.call_args.args[0]
    assert (config.engine.kind, config.engine.iters, config.engine.burnin) == ("gibbs", 40, 5)
    assert config.gamma == 0.5
    assert config.seed == 9
    assert code == EXIT_ERROR
    assert record["error"] == "NoValidModelError"
    assert (tmp_path / "o" / "error.json").is_file()


def test_missing_seed_is_a_usage_error(run, config_path, tmp_path):
    code, record = run("--config", config_path(seed=None), "--out", tmp_path / "o")
    assert code == EXIT_USAGE
    assert record["error"] == "ConfigurationError"
    assert not (tmp_path / "o" / "models.csv").exists()


def test_gate_grid():
    cell = {"mean": 0.5, "lower": 0.1, "upper": 0.9, "p_inc": 0.99, "reject": True}
    document = {
        "outcomes": {
            outcome: {"coefficients": {"z": {"kind": "control", **cell},
                                       "x": {"kind": "treatment", **cell}}}
            for outcome in ("y1", "y2")
        },
        "gate": {**cell, "by_treatment": {"x": cell}},
    }
    frame = gate_grid(document)
    assert list(frame["outcome"]) == ["y1", "y2", "GATE", "GATE"]
    assert list(frame["treatment"]) == ["x", "x", "x", "all"]
    assert list(frame.columns) == ["treatment", "outcome", "mean", "lower", "upper", "p_inc",
                                   "reject"]
