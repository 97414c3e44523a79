"""
Shared test fixtures for all tests.
"""

import argparse

import numpy as np
import pytest
from scipy.special import expit

from bsca.models.data import Dataset, Family, Role
from bsca.models.run_config import RunConfig


def simulate_dataset(
    n: int = 400,
    seed: int = 7,
    beta: float = 0.5,
    controls: tuple[float, ...] = (0.8, 0.0),
    subgroup: bool = False,
    interaction: float = 0.0,
    binomial: bool = False,
) -> Dataset:
    """Synthetic data with a binary treatment x, Gaussian controls z1.. and optional subgroup g."""
    rng = np.random.default_rng(seed)
    x = rng.integers(0, 2, n).astype(float)
    columns = {}
    eta = 1.0 + beta * (x - 0.5)
    control_columns = {}
    for index, effect in enumerate(controls, start=1):
        z = rng.standard_normal(n)
        control_columns[f"z{index}"] = z
        eta = eta + effect * z
    g = None
    if subgroup:
        g = (rng.random(n) < 0.4).astype(float)
        eta = eta + 0.3 * (g - g.mean()) + interaction * (x - 0.5) * (g - g.mean())
    if binomial:
        y = (rng.random(n) < expit(eta)).astype(float)
    else:
        y = eta + rng.standard_normal(n)

    columns["y"] = y
    columns["x"] = x
    columns.update(control_columns)
    roles = {"y": Role.OUTCOME, "x": Role.TREATMENT}
    roles.update({name: Role.CONTROL for name in control_columns})
    if g is not None:
        columns["g"] = g
        roles["g"] = Role.SUBGROUP
    return Dataset(
        columns=columns,
        roles=roles,
        families={"y": Family.BINOMIAL if binomial else Family.GAUSSIAN},
    )


@pytest.fixture
def rng():
    """A seeded generator for test data."""
    return np.random.default_rng(20240601)


@pytest.fixture
def make_dataset():
    """Factory for synthetic datasets, see ``simulate_dataset``."""
    return simulate_dataset


@pytest.fixture
def gaussian_dataset():
    """Gaussian outcome, binary treatment with effect 0.5, one relevant and one null control."""
    return simulate_dataset()


@pytest.fixture
def write_csv(tmp_path):
    """Write a dataset as CSV and return its path."""

    def write(dataset: Dataset, name: str = "data.csv"):
        path = tmp_path / name
        names = list(dataset.columns)
        lines = [",".join(names)]
        for row in range(dataset.n):
            lines.append(",".join(repr(float(dataset.columns[column][row])) for column in names))
        path.write_text("\n".join(lines) + "\n", encoding="utf-8")
        return path

    return write


@pytest.fixture
def run_config(tmp_path, write_csv):
    """A run configuration over a written dataset; keyword arguments override fields."""

    def build(dataset: Dataset | None = None, **fields) -> RunConfig:
        dataset = simulate_dataset() if dataset is None else dataset
        document = {
            "data": str(write_csv(dataset)),
            "outcomes": [
                {"name": name, "family": dataset.family(name).value}
                for name in dataset.names(Role.OUTCOME)
            ],
            "treatments": [{"name": name} for name in dataset.names(Role.TREATMENT)],
            "controls": [{"name": name} for name in dataset.names(Role.CONTROL)],
            "subgroups": dataset.names(Role.SUBGROUP),
            "seed": 17,
            "draws": 500,
            "output_dir": str(tmp_path / "out"),
        }
        document.update(fields)
        return RunConfig.model_validate(document)

    return build


@pytest.fixture
def config_path(tmp_path, run_config):
    """Write a run configuration as JSON and return its path."""

    def write(dataset: Dataset | None = None, **fields):
        path = tmp_path / "config.json"
        path.write_text(run_config(dataset, **fields).model_dump_json(indent=2), encoding="utf-8")
        return path

    return write


@pytest.fixture
def cli():
    """A bare parser and the subcommand registry handlers register with."""
    parser = argparse.ArgumentParser(prog="bsca-test")
    return parser, parser.add_subparsers(dest="command", required=True)
