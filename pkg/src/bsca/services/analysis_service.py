"""Orchestration of a complete analysis and serialization of its results."""

import logging
from typing import Any

import numpy as np
import pandas as pd

from bsca import __version__
from bsca.config import settings
from bsca.exceptions import NoValidModelError, UnsupportedMeasureError
from bsca.models.curve import MedianTestResult, SpecCurve
from bsca.models.data import BlockKind, CodedDesign, Dataset, Family, Role
from bsca.models.gate import PARTIAL_CORRELATION_SIGN_NOTE, OutcomeSummary
from bsca.models.posterior import BmaPosterior
from bsca.models.result import RunResult
from bsca.models.run_config import RunConfig
from bsca.models.space import ModelSpace
from bsca.services import (
    bma_service,
    dataset_service,
    modelspace_service,
    multiout_service,
    sca_service,
)

logger = logging.getLogger(__name__)


def load(config: RunConfig) -> tuple[Dataset, CodedDesign, ModelSpace]:
    """Read the data, code the design and derive the model space of a run."""
    dataset = dataset_service.load_csv(
        config.data,
        config.roles(),
        config.families(),
        categorical=config.design_options().categorical_controls,
    )
    design = dataset_service.build_design(dataset, config.design_options())
    space = modelspace_service.build_space(
        design, config.space.forced_in, config.space.free_treatments
    )
    logger.info(
        f"Design has {design.matrix.shape[1]} columns in {len(design.blocks)} blocks; "
        f"{len(space.free_blocks)} free blocks, "
        f"{modelspace_service.count_models(space)} models"
    )
    return dataset, design, space


def _subgroup_effects(
    summary: OutcomeSummary, design: CodedDesign, seed: int, draws: int | None
) -> dict[str, dict[str, BmaPosterior]]:
    interactions = design.blocks_of_kind(BlockKind.INTERACTION)
    subgroups = list(design.subgroup_shares)
    profiles = [(subgroup, member) for subgroup in subgroups for member in (True, False)]
    seeds = multiout_service.child_seeds(seed, len(interactions) * len(profiles))
    effects: dict[str, dict[str, BmaPosterior]] = {}
    for index, block in enumerate(interactions):
        effects[block.treatment] = {
            f"{subgroup}={int(member)}": bma_service.subgroup_effect(
                summary.exploration.models,
                design,
                block.treatment,
                {subgroup: member},
                seeds[index * len(profiles) + offset],
                draws,
            )
            for offset, (subgroup, member) in enumerate(profiles)
        }
    return effects


def run_analysis(config: RunConfig) -> RunResult:
    """The ``run`` command: per-outcome BMA, optional GATE, partial correlations
    and subgroup effects.

    Raises:
        ConfigurationError: If the seed is missing or the configuration is invalid
        NoValidModelError: If every outcome failed
    """
    seed = config.require_seed()
    dataset, design, space = load(config)
    outcome_seed, gate_seed, subgroup_seed, correlation_seed = multiout_service.child_seeds(
        seed, 4
    )

    table = multiout_service.per_outcome_summary(
        dataset, design, space, config.engine, config.gamma, outcome_seed, config.draws
    )
    if not table.summaries:
        raise NoValidModelError(f"Every outcome failed: {table.errors}")

    outcomes = dataset.names(Role.OUTCOME)
    gate = None
    if config.gate and len(outcomes) > 1:
        if any(dataset.family(name) is Family.BINOMIAL for name in outcomes):
            logger.warning("GATE skipped: it is defined for Gaussian outcomes only")
        else:
            gate = multiout_service.gate(
                dataset, design, space, config.engine, config.gamma, gate_seed, config.draws,
                table,
            )

    subgroup_effects = {}
    if design.blocks_of_kind(BlockKind.INTERACTION):
        for outcome, summary in table.summaries.items():
            subgroup_effects[outcome] = _subgroup_effects(
                summary, design, subgroup_seed, config.draws
            )

    partial_correlations = {}
    if config.partial_correlations:
        treatments = [design.column_names[column] for column in design.treatment_columns()]
        for outcome, summary in table.summaries.items():
            seeds = multiout_service.child_seeds(correlation_seed, len(treatments))
            try:
                partial_correlations[outcome] = {
                    name: multiout_service.partial_correlation(
                        dataset, design, summary.exploration.models, outcome, name, child,
                        config.draws,
                    )
                    for name, child in zip(treatments, seeds)
                }
            except UnsupportedMeasureError as error:
                logger.warning(f"Partial correlations skipped for '{outcome}': {error}")

    odds_ratios = {
        outcome: {
            name: bma_service.report_odds_ratios(posterior, Family.BINOMIAL)
            for name, posterior in summary.posteriors.items()
        }
        for outcome, summary in table.summaries.items()
        if dataset.family(outcome) is Family.BINOMIAL
    }

    return RunResult(
        config=config,
        seed=seed,
        rows=dataset.n,
        dropped=dataset.dropped,
        design=design,
        space=space,
        table=table,
        gate=gate,
        partial_correlations=partial_correlations,
        subgroup_effects=subgroup_effects,
        odds_ratios=odds_ratios,
    )


def models_frame(result: RunResult) -> pd.DataFrame:
    """One row per explored model and outcome, in rank order."""
    free_blocks = result.space.free_blocks
    treatment_columns = result.design.treatment_columns()
    treatment_names = [result.design.column_names[column] for column in treatment_columns]
    records = []
    for outcome, summary in result.table.summaries.items():
        exploration = summary.exploration
        for rank, model in enumerate(exploration.models, start=1):
            record: dict[str, Any] = {
                "outcome": outcome,
                "engine": exploration.engine,
                "rank": rank,
                "mask": model.model.mask,
                "ebic": model.ebic,
                "weight": model.weight,
                "visits": exploration.visits.get(model.model.mask, 0)
                if exploration.engine == "gibbs"
                else np.nan,
                "flag": model.flag or "",
            }
            for position, block in enumerate(free_blocks):
                record[f"inc:{block.name}"] = int(model.model.includes(position))
            for name, column in zip(treatment_names, treatment_columns):
                position = model.position(column)
                usable = model.fit is not None and position is not None
                record[f"est:{name}"] = (
                    float(model.fit.coefficients[position]) if usable else np.nan
                )
                record[f"se:{name}"] = (
                    float(model.fit.standard_errors[position]) if usable else np.nan
                )
            records.append(record)
    columns = ["outcome", "engine", "rank", "mask", "ebic", "weight", "visits", "flag"]
    columns += [f"inc:{block.name}" for block in free_blocks]
    columns += [f"{prefix}:{name}" for name in treatment_names for prefix in ("est", "se")]
    return pd.DataFrame(records, columns=columns)


def _summary(posterior: BmaPosterior, threshold: float | None) -> dict[str, Any]:
    decision = bma_service.test_nonzero(posterior, threshold)
    return {
        "mean": posterior.mean,
        "lower": posterior.lower,
        "upper": posterior.upper,
        "level": posterior.level,
        "p_inc": posterior.p_inc,
        "zero_mass": posterior.zero_mass,
        "reject": decision.reject,
        "threshold": decision.threshold,
        "interval_kind": posterior.interval_kind,
        "interval_flag": posterior.interval_flag,
    }


def _column_kinds(design: CodedDesign) -> dict[str, str]:
    return {
        design.column_names[column]: block.kind.value
        for block in design.blocks
        for column in block.columns
    }


def coefficients_document(result: RunResult) -> dict[str, Any]:
    """The JSON document of per-coefficient posterior summaries and run metadata."""
    config = result.config
    design = result.design
    kinds = _column_kinds(design)
    outcomes: dict[str, Any] = {}
    for outcome, summary in result.table.summaries.items():
        coefficients = {}
        for name, posterior in summary.posteriors.items():
            item = {"kind": kinds[name], **_summary(posterior, config.threshold)}
            item["density"] = bma_service.density(posterior)
            scale = design.scales[design.column_index(name)]
            if scale != 1.0:
                item["raw_scale"] = {
                    "factor": scale,
                    "mean": posterior.mean * scale,
                    "lower": posterior.lower * scale,
                    "upper": posterior.upper * scale,
                }
            if outcome in result.odds_ratios:
                item["odds_ratio"] = result.odds_ratios[outcome][name].model_dump(
                    exclude={"name"}
                )
            coefficients[name] = item
        entry: dict[str, Any] = {
            "family": _family(result, outcome),
            "engine": summary.exploration.engine,
            "models_explored": len(summary.exploration.models),
            "space_size": summary.exploration.space_size,
            "inclusion_probabilities": summary.exploration.inclusion_probabilities(
                result.space
            ),
            "coefficients": coefficients,
        }
        if outcome in result.subgroup_effects:
            entry["subgroup_effects"] = {
                treatment: [
                    {"profile": profile, **_summary(posterior, config.threshold)}
                    for profile, posterior in profiles.items()
                ]
                for treatment, profiles in result.subgroup_effects[outcome].items()
            }
        outcomes[outcome] = entry

    document: dict[str, Any] = {
        "metadata": _metadata(result),
        "outcomes": outcomes,
        "errors": dict(result.table.errors),
    }
    if result.gate is not None:
        gate = result.gate
        document["gate"] = {
            "caveat": gate.caveat,
            "outcomes": gate.outcomes,
            "treatments": gate.treatments,
            **_summary(gate.gate, config.threshold),
            "by_treatment": {
                name: _summary(posterior, config.threshold)
                for name, posterior in gate.gate_by_treatment.items()
            },
            "pair_average": gate.pair_average,
            "mean_outcome_coefficients": {
                name: _summary(posterior, config.threshold)
                for name, posterior in gate.mean_outcome_columns.items()
            },
            "models_explored": len(gate.mean_outcome.exploration.models),
        }
    if result.partial_correlations:
        document["partial_correlations"] = {
            outcome: {
                name: {
                    **_summary(correlation.posterior, config.threshold),
                    "treatment_residual_variance": correlation.treatment_residual_variance,
                    "bound_violations": correlation.bound_violations,
                }
                for name, correlation in correlations.items()
            }
            for outcome, correlations in result.partial_correlations.items()
        }
    return document


def _family(result: RunResult, outcome: str) -> str:
    return result.config.families()[outcome].value


def _metadata(result: RunResult) -> dict[str, Any]:
    config = result.config
    metadata = {
        "version": __version__,
        "command": "run",
        "seed": result.seed,
        "engine": config.engine.kind,
        "gamma": config.gamma if config.gamma is not None else settings.ebic_gamma,
        "threshold": settings.test_threshold if config.threshold is None else config.threshold,
        "posterior_draws": settings.posterior_draws if config.draws is None else config.draws,
        "interval_kind": "equal-tailed",
        "interval_level": settings.interval_level,
        "weights_normalized_over": "explored set",
        "rows": result.rows,
        "rows_dropped": result.dropped,
        "forced_blocks": [block.name for block in result.space.forced_blocks],
        "free_blocks": [block.name for block in result.space.free_blocks],
        "space_size": modelspace_service.count_models(result.space),
    }
    if config.engine.kind == "gibbs":
        metadata["gibbs_iters"] = (
            settings.gibbs_iters if config.engine.iters is None else config.engine.iters
        )
        metadata["gibbs_burnin"] = (
            config.engine.burnin if config.engine.burnin is not None else settings.gibbs_burnin
        )
    if result.partial_correlations:
        metadata["partial_correlation_sign_note"] = PARTIAL_CORRELATION_SIGN_NOTE
    return metadata


def run_sca(config: RunConfig) -> tuple[SpecCurve, MedianTestResult]:
    """The ``sca`` command: the specification curve and its median test."""
    seed = config.require_seed()
    dataset, design, _ = load(config)
    specs = sca_service.build_specs(
        [outcome.name for outcome in config.outcomes],
        [treatment.name for treatment in config.treatments],
        [control.name for control in config.controls],
        config.sca.treatment_sets,
        config.sca.control_sets,
        config.subgroups if config.sca.subsets else (),
    )
    logger.info(f"Specification curve over {len(specs)} specifications")
    curve = sca_service.run_curve(specs, dataset, design)
    test = sca_service.median_test(
        curve, dataset, design, method=config.sca.method, draws=config.sca.draws, seed=seed
    )
    return curve, test


def median_test_document(curve: SpecCurve, test: MedianTestResult) -> dict[str, Any]:
    """The JSON report of a median test."""
    return {
        "version": __version__,
        "command": "sca",
        "method": test.method,
        "draws": test.draws,
        "seed": test.seed,
        "observed_median": test.observed_median,
        "p_value": test.p_value,
        "share_significant": curve.share_significant,
        "mean_z": curve.mean_z,
        "estimates": len(curve.estimates),
        "gaps": [
            {"spec_id": gap.spec_id, "spec": gap.spec.label, "reason": gap.reason}
            for gap in curve.gaps
        ],
        "null_medians": [value for value in test.null_medians if np.isfinite(value)],
    }
