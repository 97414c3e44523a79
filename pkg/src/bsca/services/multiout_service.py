"""Multiple outcomes: per-outcome tables, GATE via the mean outcome, partial correlations."""

import logging
from collections.abc import Sequence
from concurrent.futures import ThreadPoolExecutor

import numpy as np
from scipy import linalg

from bsca.config import settings
from bsca.exceptions import BscaError, FamilyError, UnsupportedMeasureError
from bsca.models.data import BlockKind, CodedDesign, Dataset, Family, Role
from bsca.models.gate import (
    GateResult,
    IdentityCheck,
    OutcomeSummary,
    OutcomeTable,
    PartialCorrelationResult,
)
from bsca.models.posterior import MixtureComponent
from bsca.models.run_config import EngineConfig
from bsca.models.space import ModelSpace, ScoredModel
from bsca.services import bma_service, modelspace_service

logger = logging.getLogger(__name__)

MEAN_OUTCOME = "mean outcome"


def child_seeds(seed: int | np.random.SeedSequence, count: int) -> list[int]:
    sequence = seed if isinstance(seed, np.random.SeedSequence) else np.random.SeedSequence(seed)
    return [int(child.generate_state(1)[0]) for child in sequence.spawn(count)]


def summarize_outcome(
    outcome: str,
    y: np.ndarray,
    family: Family,
    design: CodedDesign,
    space: ModelSpace,
    engine: EngineConfig | None = None,
    gamma: float | None = None,
    seed: int = 0,
    draws: int | None = None,
) -> OutcomeSummary:
    """The single-outcome pipeline: explore the space, then average every coefficient."""
    engine = engine or EngineConfig()
    search_seed, draw_seed = child_seeds(seed, 2)
    logger.info(f"Analyzing outcome '{outcome}' ({family.value}, engine {engine.kind})")
    exploration = modelspace_service.explore(
        space,
        design,
        y,
        family,
        engine=engine.kind,
        iters=engine.iters,
        burnin=engine.burnin,
        seed=search_seed,
        gamma=gamma,
        cap=engine.enumeration_cap,
    )
    posteriors = bma_service.aggregate_all(exploration.models, design, draw_seed, draws)
    return OutcomeSummary(outcome=outcome, exploration=exploration, posteriors=posteriors)


def per_outcome_summary(
    dataset: Dataset,
    design: CodedDesign,
    space: ModelSpace,
    engine: EngineConfig | None = None,
    gamma: float | None = None,
    seed: int = 0,
    draws: int | None = None,
    workers: int | None = None,
) -> OutcomeTable:
    """Run the single-outcome pipeline for every outcome on a shared model space.

    A failure is recorded against its outcome; the other outcomes still run.
    """
    outcomes = dataset.names(Role.OUTCOME)
    seeds = child_seeds(seed, len(outcomes))
    workers = settings.workers if workers is None else workers

    def run(item: tuple[str, int]) -> OutcomeSummary | BscaError:
        outcome, outcome_seed = item
        try:
            return summarize_outcome(
                outcome,
                np.asarray(dataset.columns[outcome]),
                dataset.family(outcome),
                design,
                space,
                engine,
                gamma,
                outcome_seed,
                draws,
            )
        except BscaError as error:
            logger.warning(f"Outcome '{outcome}' failed: {type(error).__name__}: {error}")
            return error

    if workers > 1:
        with ThreadPoolExecutor(max_workers=workers) as pool:
            results = list(pool.map(run, zip(outcomes, seeds)))
    else:
        results = [run(item) for item in zip(outcomes, seeds)]

    summaries = {}
    errors = {}
    for outcome, result in zip(outcomes, results):
        if isinstance(result, BscaError):
            errors[outcome] = f"{type(result).__name__}: {result}"
        else:
            summaries[outcome] = result
    return OutcomeTable(summaries=summaries, errors=errors)


def mean_outcome(dataset: Dataset, outcomes: Sequence[str]) -> np.ndarray:
    """m_i, the average of an individual's outcomes."""
    return np.mean([dataset.columns[outcome] for outcome in outcomes], axis=0)


def gate(
    dataset: Dataset,
    design: CodedDesign,
    space: ModelSpace,
    engine: EngineConfig | None = None,
    gamma: float | None = None,
    seed: int = 0,
    draws: int | None = None,
    table: OutcomeTable | None = None,
) -> GateResult:
    """Global average treatment effects from the BMA of the mean outcome.

    The mean-outcome treatment coefficients estimate GATE_j; their average is
    the GATE, whose inclusion probability is the weight of the models holding
    any treatment. When ``table`` is given, the per-pair BMA means and their
    per-treatment averages are reported alongside.

    Raises:
        FamilyError: If any outcome is binomial
    """
    outcomes = dataset.names(Role.OUTCOME)
    if binomial := [name for name in outcomes if dataset.family(name) is Family.BINOMIAL]:
        raise FamilyError(f"The GATE needs Gaussian outcomes; binomial: {binomial}")

    summary = summarize_outcome(
        MEAN_OUTCOME,
        mean_outcome(dataset, outcomes),
        Family.GAUSSIAN,
        design,
        space,
        engine,
        gamma,
        seed,
        draws,
    )
    treatment_columns = design.treatment_columns()
    treatments = [design.column_names[column] for column in treatment_columns]
    overall = bma_service.linear_combination(
        summary.exploration.models,
        {column: 1.0 / len(treatment_columns) for column in treatment_columns},
        "GATE",
        seed=child_seeds(seed, 3)[2],
        draws=draws,
    )

    pair_means: dict[str, dict[str, float]] = {}
    if table is not None:
        for (treatment, outcome), posterior in table.cells().items():
            if treatment in treatments:
                pair_means.setdefault(treatment, {})[outcome] = posterior.mean
    pair_average = {
        treatment: float(np.mean(list(means.values()))) for treatment, means in pair_means.items()
    }

    logger.info(
        f"GATE over {len(outcomes)} outcomes and {len(treatments)} treatments: {overall.mean:.4f}"
    )
    return GateResult(
        outcomes=outcomes,
        treatments=treatments,
        mean_outcome=summary,
        mean_outcome_columns=summary.posteriors,
        gate_by_treatment={name: summary.posteriors[name] for name in treatments},
        gate=overall,
        pair_means=pair_means,
        pair_average=pair_average,
    )


def _least_squares(X: np.ndarray, y: np.ndarray) -> np.ndarray:
    coefficients, *_ = linalg.lstsq(X, y)
    return coefficients


def mean_outcome_identity(
    design: CodedDesign, outcomes: np.ndarray, columns: Sequence[int]
) -> IdentityCheck:
    """Compare mean-outcome least squares with the average of per-outcome fits.

    Under one fixed Gaussian model the two coincide, because least squares is
    linear in the response.

    Args:
        design: Coded design
        outcomes: n x L matrix of responses
        columns: Design columns of the fixed model
    """
    outcomes = np.asarray(outcomes, dtype=float)
    if outcomes.ndim == 1:
        outcomes = outcomes[:, None]
    X = design.matrix[:, list(columns)]
    per_outcome = np.column_stack(
        [_least_squares(X, outcomes[:, index]) for index in range(outcomes.shape[1])]
    )
    averaged = per_outcome.mean(axis=1)
    pooled = _least_squares(X, outcomes.mean(axis=1))
    return IdentityCheck(
        columns=tuple(columns),
        per_outcome=per_outcome,
        averaged=averaged,
        mean_outcome=pooled,
        max_abs_difference=float(np.abs(averaged - pooled).max()),
    )


def partial_correlation(
    dataset: Dataset,
    design: CodedDesign,
    scored: list[ScoredModel],
    outcome: str,
    treatment: str,
    seed: int = 0,
    draws: int | None = None,
) -> PartialCorrelationResult:
    """BMA posterior of the partial correlation between an outcome and a treatment.

    var(x_j | y, x_-j, z) is the residual variance of x_j regressed on the
    outcome and every other design column. Within a model, rho_j is beta_j
    times sqrt(var(x_j | y, x_-j, z) / phi), so each including model
    contributes a rescaled Gaussian component; excluding models put mass at 0.
    Draws outside [-1, 1] are counted, not clamped.

    Raises:
        UnsupportedMeasureError: For binomial outcomes or designs with subgroups
    """
    if dataset.family(outcome) is Family.BINOMIAL:
        raise UnsupportedMeasureError("Partial correlations need a Gaussian outcome")
    if design.blocks_of_kind(BlockKind.SUBGROUP_MAIN) or design.blocks_of_kind(
        BlockKind.INTERACTION
    ):
        raise UnsupportedMeasureError("Partial correlations are defined without moderators")

    column = design.column_index(treatment)
    y = np.asarray(dataset.columns[outcome], dtype=float)
    x = design.matrix[:, column]
    rest = np.delete(design.matrix, column, axis=1)
    regressors = np.column_stack([y, rest])
    residuals = x - regressors @ _least_squares(regressors, x)
    residual_variance = float(residuals @ residuals / len(x))

    components = []
    for model in scored:
        position = model.position(column)
        if model.weight <= 0.0 or model.fit is None or position is None:
            continue
        scale = np.sqrt(residual_variance / model.fit.dispersion)
        components.append(
            MixtureComponent(
                weight=model.weight,
                mean=float(model.fit.coefficients[position] * scale),
                sd=float(model.fit.standard_errors[position] * scale),
                mask=model.model.mask,
            )
        )
    posterior = bma_service.mixture_posterior(f"rho:{treatment}", components, seed, draws)
    violations = int((np.abs(posterior.draws) > 1.0).sum())
    if violations:
        logger.warning(f"{violations} draws of rho:{treatment} fall outside [-1, 1]")
    return PartialCorrelationResult(
        treatment=treatment,
        posterior=posterior,
        treatment_residual_variance=residual_variance,
        bound_violations=violations,
    )
