"""Seeded Monte Carlo harness comparing BMA and the specification-curve median."""

import io
import logging
import time
from concurrent.futures import ThreadPoolExecutor

import numpy as np
import pandas as pd
from numpy.random import Generator, Philox, SeedSequence

from bsca.config import settings
from bsca.exceptions import BscaError, ConfigurationError
from bsca.models.data import Dataset, DesignOptions, Family, Role, TreatmentCoding
from bsca.models.run_config import EngineConfig
from bsca.models.simulation import SimReport, SimRow, SimScenario
from bsca.services import (
    bma_service,
    dataset_service,
    modelspace_service,
    multiout_service,
    sca_service,
)

logger = logging.getLogger(__name__)

CONTROL = "z"

TABLE_COLUMNS = [
    "scenario",
    "estimator",
    "target",
    "truth",
    "bias",
    "rmse",
    "rejection_rate",
    "replicates",
    "failed",
]

MULTI_OUTCOME_SIGMA = [
    [1.0, 0.9, 0.9, 0.1],
    [0.9, 1.0, 0.9, 0.1],
    [0.9, 0.9, 1.0, 0.1],
    [0.1, 0.1, 0.1, 1.0],
]

SCENARIOS: dict[str, dict] = {
    "1": {"beta": [[0.0]]},
    "2": {"beta": [[1.0]]},
    "3": {"beta": [[0.0]] * 6},
    "4": {"beta": [[0.0], [0.0], [0.25], [0.75], [1.0], [1.0]]},
    "5-null": {"beta": [[0.0] * 4] * 5, "sigma": MULTI_OUTCOME_SIGMA},
    "5-effect": {
        "beta": [[1.0, 1.0, 1.0, 0.25]] * 3 + [[0.0] * 4] * 2,
        "sigma": MULTI_OUTCOME_SIGMA,
    },
}


def scenario_names(identifier: str) -> list[str]:
    """Expand a scenario identifier: ``all`` is every scenario, ``5`` both multi-outcome cases.

    Raises:
        ConfigurationError: For unknown identifiers
    """
    if identifier == "all":
        return list(SCENARIOS)
    if identifier == "5":
        return ["5-null", "5-effect"]
    if identifier not in SCENARIOS:
        raise ConfigurationError(
            f"Unknown scenario '{identifier}'; choose one of {['all', '5', *SCENARIOS]}"
        )
    return [identifier]


def scenario(name: str, master_seed: int, **overrides) -> SimScenario:
    """A catalogued scenario with its master seed and optional overrides."""
    if name not in SCENARIOS:
        raise ConfigurationError(f"Unknown scenario '{name}'")
    return SimScenario(name=name, master_seed=master_seed, **SCENARIOS[name], **overrides)


def _replicate_seeds(scenario: SimScenario, index: int) -> list[SeedSequence]:
    """Independent streams for data, model search, posterior draws and SCA resampling."""
    return SeedSequence([scenario.master_seed, index]).spawn(4)


def _square_root(sigma: np.ndarray) -> np.ndarray:
    """Symmetric square root of a positive definite matrix."""
    eigenvalues, eigenvectors = np.linalg.eigh(sigma)
    return eigenvectors @ np.diag(np.sqrt(eigenvalues)) @ eigenvectors.T


def treatment_names(scenario: SimScenario) -> list[str]:
    return [f"x{index + 1}" for index in range(scenario.J)]


def outcome_names(scenario: SimScenario) -> list[str]:
    return ["y"] if scenario.L == 1 else [f"y{index + 1}" for index in range(scenario.L)]


def generate(scenario: SimScenario, index: int) -> Dataset:
    """Draw one synthetic dataset.

    x ~ N(0, I_J), z ~ N(mean of x, 1), errors ~ N(0, Sigma) and
    y = beta'x + z + error, independently across rows. Deterministic in
    (master seed, replicate index).
    """
    rng = Generator(Philox(_replicate_seeds(scenario, index)[0]))
    x = rng.standard_normal((scenario.n, scenario.J))
    z = x.mean(axis=1) + rng.standard_normal(scenario.n)
    errors = rng.standard_normal((scenario.n, scenario.L)) @ _square_root(scenario.sigma_matrix)
    y = x @ scenario.beta_matrix + z[:, None] + errors

    columns = {name: y[:, index] for index, name in enumerate(outcome_names(scenario))}
    columns.update({name: x[:, index] for index, name in enumerate(treatment_names(scenario))})
    columns[CONTROL] = z
    roles = {name: Role.OUTCOME for name in outcome_names(scenario)}
    roles.update({name: Role.TREATMENT for name in treatment_names(scenario)})
    roles[CONTROL] = Role.CONTROL
    return Dataset(
        columns=columns,
        roles=roles,
        families={name: Family.GAUSSIAN for name in outcome_names(scenario)},
    )


def _design_options(scenario: SimScenario) -> DesignOptions:
    return DesignOptions(
        treatment_codings={
            name: TreatmentCoding(kind="identity") for name in treatment_names(scenario)
        }
    )


def _seed_int(sequence: SeedSequence) -> int:
    return int(sequence.generate_state(1)[0])


def run_replicate(scenario: SimScenario, index: int) -> dict[tuple[str, str], tuple[float, bool]]:
    """Estimates and rejections of one replicate, keyed by (estimator, target).

    Every block but the intercept is free, so the inclusion-probability test
    applies to the treatments as well.
    """
    _, search_seed, draw_seed, sca_seed = _replicate_seeds(scenario, index)
    dataset = generate(scenario, index)
    design = dataset_service.build_design(dataset, _design_options(scenario))
    space = modelspace_service.build_space(design, free_treatments=True)
    treatments = treatment_names(scenario)
    columns = design.treatment_columns()
    results: dict[tuple[str, str], tuple[float, bool]] = {}

    if scenario.L > 1:
        result = multiout_service.gate(
            dataset,
            design,
            space,
            EngineConfig(kind="enumerate"),
            seed=_seed_int(search_seed),
            draws=None,
        )
        results[("BMA", "GATE")] = (
            result.gate.mean,
            bma_service.test_nonzero(result.gate).reject,
        )
        for name, posterior in result.gate_by_treatment.items():
            results[("BMA", f"GATE:{name}")] = (
                posterior.mean,
                bma_service.test_nonzero(posterior).reject,
            )
        return results

    y = np.asarray(dataset.columns["y"])
    exploration = modelspace_service.enumerate_models(space, design, y, Family.GAUSSIAN, workers=1)
    average = bma_service.linear_combination(
        exploration.models,
        {column: 1.0 / len(columns) for column in columns},
        "ATE",
        seed=draw_seed,
    )
    results[("BMA", "ATE")] = (average.mean, bma_service.test_nonzero(average).reject)
    if scenario.J > 1:
        children = draw_seed.spawn(len(columns))
        for name, column, child in zip(treatments, columns, children):
            posterior = bma_service.aggregate(exploration.models, column, name, child)
            results[("BMA", name)] = (posterior.mean, bma_service.test_nonzero(posterior).reject)

    if scenario.run_sca:
        specs = sca_service.specs_for_blocks(["y"], treatments, [CONTROL])
        curve = sca_service.run_curve(specs, dataset, design)
        test = sca_service.median_test(
            curve,
            dataset,
            design,
            method=scenario.sca_method,
            draws=scenario.sca_draws,
            seed=_seed_int(sca_seed),
            workers=1,
        )
        results[("SCA", "ATE")] = (curve.median, test.p_value < sca_service.SIGNIFICANCE_LEVEL)
    return results


def truths(scenario: SimScenario) -> dict[tuple[str, str], float]:
    """True value of every (estimator, target) pair the harness reports."""
    beta = scenario.beta_matrix
    names = treatment_names(scenario)
    if scenario.L > 1:
        values = {("BMA", "GATE"): float(beta.mean())}
        values.update(
            {("BMA", f"GATE:{name}"): float(beta[row].mean()) for row, name in enumerate(names)}
        )
        return values
    values = {("BMA", "ATE"): float(beta[:, 0].mean())}
    if scenario.J > 1:
        values.update({("BMA", name): float(beta[row, 0]) for row, name in enumerate(names)})
    if scenario.run_sca:
        values[("SCA", "ATE")] = float(beta[:, 0].mean())
    return values


def run_scenario(scenario: SimScenario, workers: int | None = None) -> SimReport:
    """Run every replicate of a scenario and aggregate bias, RMSE and rejection rates.

    Replicates that raise are counted as failed and left out of the averages.
    """
    workers = settings.workers if workers is None else workers
    logger.info(
        f"Scenario {scenario.name}: {scenario.replicates} replicates, n={scenario.n}, "
        f"J={scenario.J}, L={scenario.L}, master seed {scenario.master_seed}"
    )
    started = time.perf_counter()

    def attempt(index: int):
        try:
            return run_replicate(scenario, index)
        except BscaError as error:
            logger.warning(f"Scenario {scenario.name} replicate {index} failed: {error}")
            return None

    indices = range(scenario.replicates)
    if workers > 1:
        with ThreadPoolExecutor(max_workers=workers) as pool:
            outcomes = list(pool.map(attempt, indices))
    else:
        outcomes = [attempt(index) for index in indices]

    completed = [outcome for outcome in outcomes if outcome is not None]
    failed = len(outcomes) - len(completed)
    rows = []
    if completed:
        for (estimator, target), truth in truths(scenario).items():
            estimates = np.array([outcome[(estimator, target)][0] for outcome in completed])
            rejections = np.array([outcome[(estimator, target)][1] for outcome in completed])
            errors = estimates - truth
            rows.append(
                SimRow(
                    scenario=scenario.name,
                    estimator=estimator,
                    target=target,
                    truth=truth,
                    bias=float(errors.mean()),
                    rmse=float(np.sqrt((errors**2).mean())),
                    rejection_rate=float(rejections.mean()),
                    replicates=len(completed),
                    failed=failed,
                )
            )
    else:
        logger.error(f"Every replicate of scenario {scenario.name} failed")

    runtime = time.perf_counter() - started
    logger.info(f"Scenario {scenario.name} finished in {runtime:.1f}s ({failed} failed)")
    return SimReport(
        scenario=scenario.name,
        rows=rows,
        runtime_seconds=runtime,
        master_seed=scenario.master_seed,
        replicate_seeds=[[scenario.master_seed, index] for index in indices],
        sca_method=scenario.sca_method if scenario.run_sca and scenario.L == 1 else None,
    )


def emit_tables(report: SimReport) -> tuple[str, str]:
    """Serialize a report as CSV and as a fixed-width text table.

    The CSV holds one row per (estimator, target) and parses back losslessly
    with ``parse_tables``; the text table is for reading.
    """
    frame = pd.DataFrame(
        [row.model_dump() for row in report.rows], columns=TABLE_COLUMNS
    )
    csv_text = frame.to_csv(index=False, lineterminator="\n")

    header = [
        f"Scenario {report.scenario} (master seed {report.master_seed}, "
        f"{len(report.replicate_seeds)} replicates)",
    ]
    if report.sca_method:
        header.append(f"SCA median test: {report.sca_method}")
    header.append(f"Error factorization: {report.factorization}")
    if frame.empty:
        body = "(no completed replicates)"
    else:
        body = frame.rename(
            columns={
                "scenario": "Scenario",
                "estimator": "Estimator",
                "target": "Target",
                "truth": "Truth",
                "bias": "Bias",
                "rmse": "RMSE",
                "rejection_rate": "Rejection rate",
                "replicates": "Replicates",
                "failed": "Failed",
            }
        ).to_string(index=False, float_format=lambda value: f"{value:.3f}")
    return csv_text, "\n".join(header + ["", body, ""])


def parse_tables(csv_text: str) -> list[SimRow]:
    """Rows of a CSV written by ``emit_tables``."""
    frame = pd.read_csv(
        io.StringIO(csv_text),
        dtype={"scenario": str, "estimator": str, "target": str},
        float_precision="round_trip",
    )
    return [SimRow(**record) for record in frame.to_dict(orient="records")]
