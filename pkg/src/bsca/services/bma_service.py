"""Bayesian model averaging of scored models into per-coefficient posteriors."""

import logging
from collections.abc import Mapping, Sequence

import numpy as np
from scipy.stats import norm

from bsca.config import settings
from bsca.exceptions import ConfigurationError, MisuseError
from bsca.models.data import BlockKind, CodedDesign, Family
from bsca.models.posterior import (
    BmaPosterior,
    MixtureComponent,
    NonzeroDecision,
    OddsRatioSummary,
)
from bsca.models.space import ScoredModel

logger = logging.getLogger(__name__)

Seed = int | Sequence[int] | np.random.SeedSequence


def _mixture_draws(
    zero_mass: float, components: list[MixtureComponent], draws: int, seed: Seed
) -> np.ndarray:
    """Stratified draws from a point mass at zero plus Gaussian components.

    Draws are allocated to the components by systematic sampling on the
    cumulative weights; inside a component they sit at the normal quantiles of
    evenly spaced levels. A seeded shuffle removes the ordering.
    """
    rng = np.random.default_rng(seed)
    mixture_weights = np.array([zero_mass] + [component.weight for component in components])
    boundaries = np.cumsum(mixture_weights / mixture_weights.sum())
    boundaries[-1] = 1.0
    positions = (np.arange(draws) + rng.random()) / draws
    counts = np.bincount(
        np.searchsorted(boundaries, positions, side="right"), minlength=len(mixture_weights)
    )[: len(mixture_weights)]

    pieces = [np.zeros(counts[0])]
    for component, count in zip(components, counts[1:]):
        if count == 0:
            continue
        levels = (np.arange(count) + 0.5) / count
        pieces.append(component.mean + component.sd * norm.ppf(levels))
    return rng.permutation(np.concatenate(pieces))


def linear_combination(
    scored: list[ScoredModel],
    coefficients: Mapping[int, float],
    name: str,
    seed: Seed = 0,
    draws: int | None = None,
    level: float | None = None,
) -> BmaPosterior:
    """Mixture posterior of a linear combination c'theta of design coefficients.

    Each model that includes at least one of the referenced columns contributes
    a Gaussian component with mean c'beta and variance c'Vc over the columns it
    includes; the weight of the remaining models sits in a point mass at zero.

    Args:
        scored: Explored models with normalized weights
        coefficients: Design column index to multiplier
        name: Label of the quantity
        seed: Seed of the posterior draws
        draws: Number of posterior draws (settings.posterior_draws)
        level: Interval level (settings.interval_level)

    Returns:
        Posterior with exact mixture mean and equal-tailed draw-based interval
    """
    components = []
    for model in scored:
        if model.weight <= 0.0 or model.fit is None:
            continue
        positions = []
        multipliers = []
        for column, multiplier in coefficients.items():
            position = model.position(column)
            if position is not None:
                positions.append(position)
                multipliers.append(multiplier)
        if not positions:
            continue
        c = np.asarray(multipliers)
        mean = float(c @ model.fit.coefficients[positions])
        variance = float(c @ model.fit.covariance[np.ix_(positions, positions)] @ c)
        components.append(
            MixtureComponent(
                weight=model.weight,
                mean=mean,
                sd=float(np.sqrt(max(variance, 0.0))),
                mask=model.model.mask,
            )
        )
    return mixture_posterior(name, components, seed, draws, level)


def mixture_posterior(
    name: str,
    components: list[MixtureComponent],
    seed: Seed = 0,
    draws: int | None = None,
    level: float | None = None,
) -> BmaPosterior:
    """Assemble a posterior from its Gaussian components.

    The weight missing from the components sits in a point mass at zero.
    Below ``settings.point_mass_flag`` inclusion the interval is [0, 0].
    """
    draws = settings.posterior_draws if draws is None else draws
    level = settings.interval_level if level is None else level

    p_inc = min(1.0, sum(component.weight for component in components))
    zero_mass = max(0.0, 1.0 - p_inc)
    mean = sum(component.weight * component.mean for component in components)

    if not components:
        return BmaPosterior(
            name=name,
            p_inc=0.0,
            zero_mass=1.0,
            mean=0.0,
            lower=0.0,
            upper=0.0,
            level=level,
            interval_flag="excluded from every model",
            draws=np.zeros(draws),
        )

    sample = _mixture_draws(zero_mass, components, draws, seed)
    interval_flag = None
    if p_inc < settings.point_mass_flag:
        lower = upper = 0.0
        interval_flag = f"p_inc {p_inc:.4f} below {settings.point_mass_flag}; point mass at 0"
        logger.warning(f"Interval of '{name}' reported as [0, 0]: {interval_flag}")
    else:
        lower, upper = (float(value) for value in np.quantile(
            sample, [(1.0 - level) / 2.0, (1.0 + level) / 2.0]
        ))

    return BmaPosterior(
        name=name,
        p_inc=p_inc,
        zero_mass=zero_mass,
        components=components,
        mean=mean,
        lower=lower,
        upper=upper,
        level=level,
        interval_flag=interval_flag,
        draws=sample,
    )


def aggregate(
    scored: list[ScoredModel],
    column: int,
    name: str | None = None,
    seed: Seed = 0,
    draws: int | None = None,
    level: float | None = None,
) -> BmaPosterior:
    """BMA posterior of a single design coefficient."""
    return linear_combination(
        scored, {column: 1.0}, name or f"column {column}", seed, draws, level
    )


def aggregate_all(
    scored: list[ScoredModel],
    design: CodedDesign,
    seed: Seed = 0,
    draws: int | None = None,
    level: float | None = None,
) -> dict[str, BmaPosterior]:
    """Posteriors of every non-intercept design column, keyed by column name.

    Each column draws from its own child of the seed sequence, in design order.
    """
    columns = [
        column
        for block in design.blocks
        if block.kind is not BlockKind.INTERCEPT
        for column in block.columns
    ]
    children = np.random.SeedSequence(seed).spawn(len(columns))
    return {
        design.column_names[column]: aggregate(
            scored, column, design.column_names[column], child, draws, level
        )
        for column, child in zip(columns, children)
    }


def test_nonzero(posterior: BmaPosterior, threshold: float | None = None) -> NonzeroDecision:
    """Reject a zero coefficient iff its inclusion probability exceeds the threshold."""
    threshold = settings.test_threshold if threshold is None else threshold
    return NonzeroDecision(
        name=posterior.name,
        reject=posterior.p_inc > threshold,
        p_inc=posterior.p_inc,
        threshold=threshold,
    )


# Keep pytest from collecting it when imported into a test module.
test_nonzero.__test__ = False


def subgroup_values(design: CodedDesign, membership: Mapping[str, bool]) -> dict[str, float]:
    """Coded subgroup values for a membership profile.

    Members of subgroup g are coded 1 - rho_g and non-members -rho_g; subgroups
    absent from ``membership`` are set to 0, their population average.
    """
    if unknown := sorted(set(membership) - set(design.subgroup_shares)):
        raise ConfigurationError(f"Unknown subgroups: {unknown}")
    return {
        subgroup: (1.0 - share if membership[subgroup] else -share)
        if subgroup in membership
        else 0.0
        for subgroup, share in design.subgroup_shares.items()
    }


def subgroup_effect(
    scored: list[ScoredModel],
    design: CodedDesign,
    treatment: str,
    membership: Mapping[str, bool],
    seed: Seed = 0,
    draws: int | None = None,
    level: float | None = None,
) -> BmaPosterior:
    """Posterior of the treatment effect beta_j + delta_j'g in a subgroup profile.

    Uses each model's joint Gaussian of (beta_j, delta_j), so the covariance
    between main effect and interactions is respected.

    Raises:
        ConfigurationError: If the treatment has no interaction block
    """
    interactions = [
        block
        for block in design.blocks_of_kind(BlockKind.INTERACTION)
        if block.treatment == treatment
    ]
    if not interactions:
        raise ConfigurationError(f"Treatment '{treatment}' has no interaction block")
    values = subgroup_values(design, membership)
    coefficients = {design.column_index(treatment): 1.0}
    for block in interactions:
        for column, subgroup in zip(block.columns, block.subgroups):
            coefficients[column] = values[subgroup]
    profile = ",".join(
        f"{subgroup}={int(member)}" for subgroup, member in sorted(membership.items())
    )
    return linear_combination(
        scored, coefficients, f"{treatment} | {profile}", seed, draws, level
    )


def report_odds_ratios(posterior: BmaPosterior, family: Family) -> OddsRatioSummary:
    """Odds-ratio scale summary of a log-odds coefficient.

    Raises:
        MisuseError: For Gaussian outcomes, whose coefficients are not log-odds
    """
    if family is not Family.BINOMIAL:
        raise MisuseError(
            f"Odds ratios are defined for binomial outcomes, not {family.value}"
        )
    return OddsRatioSummary(
        name=posterior.name,
        odds_ratio=float(np.exp(posterior.mean)),
        mean_odds_ratio=float(np.exp(posterior.draws).mean()),
        lower=float(np.exp(posterior.lower)),
        upper=float(np.exp(posterior.upper)),
        level=posterior.level,
    )


def density(posterior: BmaPosterior, bins: int | None = None) -> dict[str, list[float]]:
    """Histogram of the continuous part of the posterior.

    Heights integrate to the inclusion probability; the point mass at zero is
    reported separately by ``zero_mass``.
    """
    bins = settings.density_bins if bins is None else bins
    nonzero = posterior.draws[posterior.draws != 0.0]
    if nonzero.size == 0:
        return {"edges": [], "heights": []}
    heights, edges = np.histogram(nonzero, bins=bins, density=True)
    return {
        "edges": [float(edge) for edge in edges],
        "heights": [float(height * posterior.p_inc) for height in heights],
    }
