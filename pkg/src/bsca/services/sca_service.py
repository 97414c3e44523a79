"""Classical specification curve: per-specification fits and the median test."""

import logging
from collections.abc import Iterable, Sequence
from concurrent.futures import ThreadPoolExecutor
from dataclasses import dataclass
from itertools import combinations

import numpy as np
from scipy.stats import norm

from bsca.config import settings
from bsca.exceptions import (
    ConfigurationError,
    EmptyCurveError,
    FamilyError,
    FitError,
)
from bsca.models.curve import (
    MedianTestResult,
    SpecCurve,
    SpecDefinition,
    SpecEstimate,
    SpecGap,
)
from bsca.models.data import BlockKind, CodedDesign, Dataset, Family
from bsca.services import glm_service

logger = logging.getLogger(__name__)

SIGNIFICANCE_LEVEL = 0.05


def build_specs(
    outcomes: Sequence[str],
    treatments: Sequence[str],
    controls: Sequence[str] = (),
    treatment_sets: str = "joint",
    control_sets: str = "all_subsets",
    subgroups: Sequence[str] = (),
) -> list[SpecDefinition]:
    """Enumerate the specification list implied by a set of analytic choices.

    Control sets are either every subset of the controls (by size, then in
    column order) or just none and all. With subgroups, each specification is
    repeated on the members and on the non-members of every subgroup.
    """
    if treatment_sets == "joint":
        treatment_choices = [tuple(treatments)]
    else:
        treatment_choices = [(treatment,) for treatment in treatments]

    if control_sets == "all_subsets":
        control_choices = [
            subset for size in range(len(controls) + 1) for subset in combinations(controls, size)
        ]
    else:
        control_choices = [()] if not controls else [(), tuple(controls)]

    subset_choices: list[tuple[str, int] | None] = [None]
    subset_choices += [(subgroup, value) for subgroup in subgroups for value in (1, 0)]

    return [
        SpecDefinition(outcome=outcome, treatments=chosen, controls=adjusted, subset=subset)
        for outcome in outcomes
        for chosen in treatment_choices
        for adjusted in control_choices
        for subset in subset_choices
    ]


@dataclass(frozen=True)
class _PreparedSpec:
    """Design columns and rows of one specification."""

    spec_id: int
    spec: SpecDefinition
    family: Family
    columns: list[int]
    treatment_positions: list[int]
    treatment_names: list[str]
    rows: np.ndarray


def _treatment_blocks(design: CodedDesign, treatment: str):
    blocks = [
        block
        for block in design.blocks_of_kind(BlockKind.TREATMENT)
        if block.name == treatment or block.name.startswith(f"{treatment}:")
    ]
    if not blocks:
        raise ConfigurationError(f"Unknown treatment '{treatment}'")
    return blocks


def _prepare(
    specs: Sequence[SpecDefinition], dataset: Dataset, design: CodedDesign
) -> list[_PreparedSpec]:
    prepared = []
    for spec_id, spec in enumerate(specs):
        columns = list(design.block("intercept").columns)
        treatment_names = []
        for treatment in spec.treatments:
            for block in _treatment_blocks(design, treatment):
                columns.extend(block.columns)
                treatment_names.append(block.name)
        for control in spec.controls:
            columns.extend(design.block(control).columns)
        ordered = sorted(columns)
        rows = np.ones(dataset.n, dtype=bool)
        if spec.subset is not None:
            subgroup, value = spec.subset
            if subgroup not in dataset.columns:
                raise ConfigurationError(f"Unknown subgroup '{subgroup}'")
            rows = dataset.columns[subgroup] == value
        prepared.append(
            _PreparedSpec(
                spec_id=spec_id,
                spec=spec,
                family=dataset.family(spec.outcome),
                columns=ordered,
                treatment_positions=[
                    ordered.index(design.column_index(name)) for name in treatment_names
                ],
                treatment_names=treatment_names,
                rows=rows,
            )
        )
    return prepared


def _treatment_fit(prepared: _PreparedSpec, y: np.ndarray, X: np.ndarray, rows: np.ndarray):
    fit = glm_service.fit(y[rows], X[np.ix_(rows, prepared.columns)], prepared.family)
    if fit.degenerate:
        raise FitError("Zero residual variance leaves the standard errors undefined")
    positions = prepared.treatment_positions
    return fit.coefficients[positions], fit.standard_errors[positions]


def _curve_median(
    prepared: Sequence[_PreparedSpec],
    responses: Sequence[np.ndarray],
    X: np.ndarray,
    rows: Sequence[np.ndarray],
) -> float:
    """Median of every treatment estimate over the fittable specifications."""
    estimates = []
    for spec, y, spec_rows in zip(prepared, responses, rows):
        try:
            coefficients, _ = _treatment_fit(spec, y, X, spec_rows)
        except FitError:
            continue
        estimates.extend(coefficients)
    return float(np.median(estimates)) if estimates else np.nan


def run_curve(
    specs: Sequence[SpecDefinition], dataset: Dataset, design: CodedDesign
) -> SpecCurve:
    """Fit every specification with equal weight and summarize the curve.

    Specifications that cannot be fitted are kept as gaps with their reason.

    Raises:
        EmptyCurveError: If no specification could be fitted
    """
    estimates: list[SpecEstimate] = []
    gaps: list[SpecGap] = []
    for prepared in _prepare(specs, dataset, design):
        y = np.asarray(dataset.columns[prepared.spec.outcome])
        try:
            coefficients, errors = _treatment_fit(prepared, y, design.matrix, prepared.rows)
        except FitError as error:
            logger.warning(
                f"Specification {prepared.spec_id} ({prepared.spec.label}) failed: {error}"
            )
            gaps.append(
                SpecGap(
                    spec_id=prepared.spec_id,
                    spec=prepared.spec,
                    reason=f"{type(error).__name__}: {error}",
                )
            )
            continue
        for name, estimate, se in zip(prepared.treatment_names, coefficients, errors):
            z = float(estimate / se)
            p_value = float(2.0 * norm.sf(abs(z)))
            estimates.append(
                SpecEstimate(
                    spec_id=prepared.spec_id,
                    spec=prepared.spec,
                    treatment=name,
                    estimate=float(estimate),
                    se=float(se),
                    z=z,
                    p_value=p_value,
                    significant=p_value < SIGNIFICANCE_LEVEL,
                )
            )

    if not estimates:
        raise EmptyCurveError(f"All {len(specs)} specifications failed to fit")

    estimates.sort(key=lambda item: (item.estimate, item.spec_id, item.treatment))
    values = np.array([item.estimate for item in estimates])
    median = float(np.median(values))
    direction = np.sign(median)
    in_direction = sum(
        1 for item in estimates if item.significant and np.sign(item.estimate) == direction
    )
    logger.info(
        f"Specification curve: {len(estimates)} estimates from {len(specs) - len(gaps)} "
        f"specifications, {len(gaps)} gaps, median {median:.4f}"
    )
    return SpecCurve(
        estimates=estimates,
        gaps=gaps,
        median=median,
        share_significant=in_direction / len(estimates),
        mean_z=float(np.mean([item.z for item in estimates])),
    )


def _fitted_specs(curve: SpecCurve) -> list[SpecDefinition]:
    by_id = {item.spec_id: item.spec for item in curve.estimates}
    return [by_id[spec_id] for spec_id in sorted(by_id)]


def median_test(
    curve: SpecCurve,
    dataset: Dataset,
    design: CodedDesign,
    method: str | None = None,
    draws: int | None = None,
    seed: int = 0,
    workers: int | None = None,
) -> MedianTestResult:
    """Two-sided resampling test of a zero median effect.

    ``permutation`` permutes the treatment rows jointly, one permutation per
    draw shared by every specification. ``bootstrap`` removes each
    specification's fitted treatment contribution from its response, then
    resamples rows with replacement, the same rows for every specification.
    The p-value is (1 + #{|null median| >= |observed median|}) / (draws + 1).

    Raises:
        ConfigurationError: If fewer than 100 draws are requested
        FamilyError: For the bootstrap on binomial outcomes
    """
    method = settings.sca_method if method is None else method
    draws = settings.sca_draws if draws is None else draws
    workers = settings.workers if workers is None else workers
    if draws < 100:
        raise ConfigurationError(f"The median test needs at least 100 draws, got {draws}")

    prepared = _prepare(_fitted_specs(curve), dataset, design)
    X = design.matrix
    responses = [np.asarray(dataset.columns[spec.spec.outcome]) for spec in prepared]

    if method == "bootstrap":
        if any(spec.family is Family.BINOMIAL for spec in prepared):
            raise FamilyError("The null-imposed bootstrap needs Gaussian outcomes")
        null_responses = []
        for spec, y in zip(prepared, responses):
            coefficients, _ = _treatment_fit(spec, y, X, spec.rows)
            treatment_columns = [spec.columns[position] for position in spec.treatment_positions]
            null_responses.append(y - X[:, treatment_columns] @ coefficients)

        def null_median(child: np.random.SeedSequence) -> float:
            rng = np.random.default_rng(child)
            index = rng.integers(0, dataset.n, dataset.n)
            return _curve_median(
                prepared,
                [y[index] for y in null_responses],
                X[index],
                [spec.rows[index] for spec in prepared],
            )

    else:
        treatment_columns = design.treatment_columns()

        def null_median(child: np.random.SeedSequence) -> float:
            rng = np.random.default_rng(child)
            permuted = X.copy()
            permuted[:, treatment_columns] = X[rng.permutation(dataset.n)][:, treatment_columns]
            return _curve_median(prepared, responses, permuted, [spec.rows for spec in prepared])

    children = np.random.SeedSequence(seed).spawn(draws)
    if workers > 1:
        with ThreadPoolExecutor(max_workers=workers) as pool:
            null_medians = np.array(list(pool.map(null_median, children)))
    else:
        null_medians = np.array([null_median(child) for child in children])

    valid = null_medians[~np.isnan(null_medians)]
    if len(valid) < draws:
        logger.warning(f"{draws - len(valid)} of {draws} resampling draws could not be fitted")
    extreme = int((np.abs(valid) >= abs(curve.median)).sum())
    p_value = (1 + extreme) / (len(valid) + 1)
    logger.info(f"Median test ({method}, {draws} draws): p = {p_value:.4f}")
    return MedianTestResult(
        method=method,
        draws=draws,
        seed=seed,
        observed_median=curve.median,
        p_value=p_value,
        null_medians=[float(value) for value in null_medians],
    )


def curve_rows(curve: SpecCurve) -> list[dict]:
    """Flat rows of the curve in display order, for CSV output."""
    return [
        {
            "rank": rank,
            "spec_id": item.spec_id,
            "outcome": item.spec.outcome,
            "treatment": item.treatment,
            "treatments": "+".join(item.spec.treatments),
            "controls": "+".join(item.spec.controls),
            "subset": "" if item.spec.subset is None else "=".join(map(str, item.spec.subset)),
            "estimate": item.estimate,
            "se": item.se,
            "z": item.z,
            "p_value": item.p_value,
            "significant": int(item.significant),
        }
        for rank, item in enumerate(curve.estimates, start=1)
    ]


def specs_for_blocks(
    outcomes: Iterable[str], treatments: Sequence[str], controls: Sequence[str]
) -> list[SpecDefinition]:
    """The include/exclude-all-controls pair used by the simulation harness."""
    return build_specs(list(outcomes), treatments, controls, "joint", "none_or_all")
