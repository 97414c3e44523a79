"""End-to-end runs of the command line on the bundled synthetic fixture."""

import json
from pathlib import Path

import pandas as pd
import pytest

from bsca.main import create_application, main

FIXTURES = Path(__file__).parent.parent / "fixtures"


def _outputs(directory: Path) -> dict[str, bytes]:
    return {path.name: path.read_bytes() for path in sorted(directory.iterdir())}


def _run(capsys, *argv) -> tuple[int, dict]:
    code = main([str(arg) for arg in argv])
    return code, json.loads(capsys.readouterr().out)


class TestHandlerRegistration:
    """Integration tests for subcommand registration."""

    def test_subcommands_registered(self):
        parser = create_application()
        assert "{run,sca,sim,plot}" in parser.format_usage()


class TestRun:
    """The ``run`` and ``plot`` commands on two Gaussian outcomes with a subgroup."""

    @pytest.fixture
    def run_output(self, capsys, tmp_path):
        code, record = _run(
            capsys, "run", "--config", FIXTURES / "wellbeing.json", "--out", tmp_path / "first"
        )
        assert code == 0, record
        return tmp_path / "first", record

    def test_outputs(self, run_output):
        directory, record = run_output
        assert record["files"] == [
            "models.csv",
            "coefficients.json",
            "multi_outcome.csv",
            "single_outcome_wellbeing.svg",
            "single_outcome_selfesteem.svg",
            "multi_outcome.svg",
            "subgroup.svg",
        ]
        document = json.loads((directory / "coefficients.json").read_text("utf-8"))
        assert document["metadata"]["free_blocks"] == [
            "age", "sport", "region", "female", "screen:female"
        ]
        assert document["gate"]["outcomes"] == ["wellbeing", "selfesteem"]
        for entry in document["outcomes"].values():
            assert entry["coefficients"]["screen"]["p_inc"] == pytest.approx(1.0)
        models = pd.read_csv(directory / "models.csv")
        for _, weights in models.groupby("outcome")["weight"]:
            assert weights.sum() == pytest.approx(1.0)
        grid = pd.read_csv(directory / "multi_outcome.csv")
        assert list(grid["outcome"]) == ["wellbeing", "selfesteem", "GATE", "GATE"]

    def test_repeat_is_byte_identical(self, capsys, run_output, tmp_path):
        directory, _ = run_output
        code, _ = _run(
            capsys, "run", "--config", FIXTURES / "wellbeing.json", "--out", tmp_path / "second"
        )
        assert code == 0
        assert _outputs(tmp_path / "second") == _outputs(directory)

    def test_plot_reproduces_the_figures(self, capsys, run_output):
        directory, _ = run_output
        before = _outputs(directory)
        for path in directory.glob("*.svg"):
            path.unlink()
        code, record = _run(capsys, "plot", "--out", directory)
        assert code == 0
        assert sorted(record["files"]) == sorted(name for name in before if name.endswith(".svg"))
        assert _outputs(directory) == before

    def test_gibbs_engine(self, capsys, tmp_path):
        code, record = _run(
            capsys, "run", "--config", FIXTURES / "wellbeing.json", "--out", tmp_path,
            "--engine", "gibbs", "--iters", "300", "--burnin", "50",
        )
        assert code == 0, record
        models = pd.read_csv(tmp_path / "models.csv")
        assert (models["engine"] == "gibbs").all()
        for _, visits in models.groupby("outcome")["visits"]:
            assert visits.sum() == 250

    def test_binomial_outcome(self, capsys, tmp_path):
        code, _ = _run(capsys, "run", "--config", FIXTURES / "anxious.json", "--out", tmp_path)
        assert code == 0
        document = json.loads((tmp_path / "coefficients.json").read_text("utf-8"))
        screen = document["outcomes"]["anxious"]["coefficients"]["screen"]
        assert screen["odds_ratio"]["odds_ratio"] > 0


class TestSca:
    """The ``sca`` command."""

    def test_curve_is_deterministic(self, capsys, tmp_path):
        outputs = []
        for name in ("first", "second"):
            code, record = _run(
                capsys, "sca", "--config", FIXTURES / "wellbeing.json", "--out", tmp_path / name
            )
            assert code == 0, record
            outputs.append(_outputs(tmp_path / name))
        assert outputs[0] == outputs[1]
        curve = pd.read_csv(tmp_path / "first" / "curve.csv")
        assert len(curve) == 16
        assert set(curve["outcome"]) == {"wellbeing", "selfesteem"}

    def test_permutation_on_binomial(self, capsys, tmp_path):
        code, record = _run(capsys, "sca", "--config", FIXTURES / "anxious.json", "--out", tmp_path)
        assert code == 0
        assert 0.0 < record["p_value"] <= 1.0

    def test_bootstrap_on_binomial_fails(self, capsys, tmp_path):
        code, record = _run(
            capsys, "sca", "--config", FIXTURES / "anxious.json", "--out", tmp_path,
            "--method", "bootstrap",
        )
        assert code == 1
        assert record["error"] == "FamilyError"
        assert json.loads((tmp_path / "error.json").read_text("utf-8"))["error"] == "FamilyError"


class TestSim:
    """The ``sim`` command."""

    def test_repeat_is_byte_identical(self, capsys, tmp_path):
        outputs = []
        for name in ("first", "second"):
            code, record = _run(
                capsys, "sim", "--scenario", "1", "--seed", "11", "--replicates", "2",
                "--n", "200", "--draws", "100", "--out", tmp_path / name,
            )
            assert code == 0, record
            outputs.append((tmp_path / name / "sim_1.csv").read_bytes())
        assert outputs[0] == outputs[1]

    def test_missing_seed(self, capsys, tmp_path):
        code, record = _run(capsys, "sim", "--scenario", "1", "--out", tmp_path)
        assert code == 2
        assert record["error"] == "ConfigurationError"
