"""Specification lattice: EBIC scoring, enumeration and Gibbs search."""

import logging
from collections import Counter
from collections.abc import Iterable
from concurrent.futures import ThreadPoolExecutor
from itertools import product

import numpy as np
from scipy.special import expit, gammaln

from bsca.config import settings
from bsca.exceptions import (
    ConfigurationError,
    EnumerationCapError,
    FitError,
    NoValidModelError,
)
from bsca.models.data import BlockKind, CodedDesign, Family
from bsca.models.fit import GlmFit
from bsca.models.space import (
    Exploration,
    InclusionPolicy,
    ModelId,
    ModelSpace,
    ScoredModel,
    SpaceBlock,
)
from bsca.services import glm_service

logger = logging.getLogger(__name__)


def build_space(
    design: CodedDesign,
    forced_in: Iterable[str] = (),
    free_treatments: bool = False,
) -> ModelSpace:
    """Derive the model space from the design blocks.

    The intercept is always forced in and treatments are forced in unless
    ``free_treatments`` is set; controls, subgroup mains and interactions are
    free. Interaction blocks require their treatment and subgroup-main blocks
    (strong heredity).

    Raises:
        ConfigurationError: If a forced-in name is unknown, or an interaction is
            forced in while one of its parents is free
    """
    forced_in = set(forced_in)
    known = {block.name for block in design.blocks}
    if unknown := sorted(forced_in - known):
        raise ConfigurationError(f"Unknown blocks in forced_in: {unknown}")

    blocks = []
    for block in design.blocks:
        forced = (
            block.kind is BlockKind.INTERCEPT
            or (block.kind is BlockKind.TREATMENT and not free_treatments)
            or block.name in forced_in
        )
        parents: tuple[str, ...] = ()
        if block.kind is BlockKind.INTERACTION:
            parents = (block.treatment, *block.subgroups)
        blocks.append(
            SpaceBlock(
                name=block.name,
                kind=block.kind,
                columns=block.columns,
                policy=InclusionPolicy.FORCED_IN if forced else InclusionPolicy.FREE,
                parents=parents,
            )
        )

    space = ModelSpace(blocks=tuple(blocks))
    policies = {block.name: block.policy for block in space.blocks}
    for block in space.blocks:
        if any(parent not in policies for parent in block.parents):
            raise ConfigurationError(f"Block '{block.name}' references a missing parent")
        if block.policy is InclusionPolicy.FORCED_IN and any(
            policies[parent] is InclusionPolicy.FREE for parent in block.parents
        ):
            raise ConfigurationError(
                f"Forced-in block '{block.name}' needs its parents forced in as well"
            )
    return space


def _parent_bits(space: ModelSpace) -> list[int]:
    """For every free block, the mask of its free parents."""
    positions = {block.name: index for index, block in enumerate(space.free_blocks)}
    return [
        sum(1 << positions[parent] for parent in block.parents if parent in positions)
        for block in space.free_blocks
    ]


def _dependent_bits(space: ModelSpace) -> list[int]:
    """For every free block, the mask of the free blocks that require it."""
    parents = _parent_bits(space)
    return [
        sum(1 << child for child, needed in enumerate(parents) if needed >> position & 1)
        for position in range(len(parents))
    ]


def is_valid(space: ModelSpace, model: ModelId) -> bool:
    """Whether a model satisfies strong heredity."""
    return all(
        needed & model.mask == needed
        for position, needed in enumerate(_parent_bits(space))
        if model.includes(position)
    )


def _valid_masks(space: ModelSpace, cap: int | None = None) -> list[int]:
    """Heredity-valid masks in ascending order; stops early once past ``cap``."""
    parents = _parent_bits(space)
    roots = [position for position, needed in enumerate(parents) if needed == 0]
    children = [position for position, needed in enumerate(parents) if needed != 0]
    if cap is not None and 2 ** len(roots) > cap:
        # Lower bound; counting a space this large is itself too costly.
        raise EnumerationCapError(count=2 ** len(roots), cap=cap)

    masks = []
    for bits in product((0, 1), repeat=len(roots)):
        base = sum(1 << position for bit, position in zip(bits, roots) if bit)
        allowed = [child for child in children if parents[child] & base == parents[child]]
        for extra in product((0, 1), repeat=len(allowed)):
            masks.append(base | sum(1 << child for bit, child in zip(extra, allowed) if bit))
            if cap is not None and len(masks) > cap:
                raise EnumerationCapError(count=count_models(space), cap=cap)
    return sorted(masks)


def count_models(space: ModelSpace) -> int:
    """Number of heredity-valid models."""
    parents = _parent_bits(space)
    roots = [position for position, needed in enumerate(parents) if needed == 0]
    children = [parents[position] for position in range(len(parents)) if parents[position]]
    total = 0
    for bits in product((0, 1), repeat=len(roots)):
        base = sum(1 << position for bit, position in zip(bits, roots) if bit)
        total += 2 ** sum(1 for needed in children if needed & base == needed)
    return total


def model_columns(space: ModelSpace, model: ModelId) -> tuple[int, ...]:
    """Design columns of a model, in design order."""
    columns = [column for block in space.forced_blocks for column in block.columns]
    for position, block in enumerate(space.free_blocks):
        if model.includes(position):
            columns.extend(block.columns)
    return tuple(sorted(columns))


def k_free(space: ModelSpace, model: ModelId) -> int:
    """Number of free parameters a model includes."""
    return sum(
        len(block.columns)
        for position, block in enumerate(space.free_blocks)
        if model.includes(position)
    )


def ebic(fit: GlmFit | None, k_free: int, p_free: int, n: int, gamma: float) -> float:
    """Extended BIC: -2 loglik + k log n + 2 gamma log C(p, k).

    Only free parameters enter the penalty; parameters present in every model
    cancel in the weights. Unusable fits score +inf.
    """
    if fit is None or fit.degenerate or not np.isfinite(fit.loglik):
        return np.inf
    log_binomial = gammaln(p_free + 1) - gammaln(k_free + 1) - gammaln(p_free - k_free + 1)
    return float(-2.0 * fit.loglik + k_free * np.log(n) + 2.0 * gamma * log_binomial)


def weights(ebics: Iterable[float]) -> np.ndarray:
    """Posterior model probabilities proportional to exp(-EBIC / 2).

    Raises:
        NoValidModelError: If every EBIC is infinite
    """
    ebics = np.asarray(list(ebics), dtype=float)
    finite = np.isfinite(ebics)
    if not finite.any():
        raise NoValidModelError("Every explored model failed to fit")
    unnormalized = np.zeros_like(ebics)
    unnormalized[finite] = np.exp(-(ebics[finite] - ebics[finite].min()) / 2.0)
    return unnormalized / unnormalized.sum()


class ModelScorer:
    """Fits and scores models of one space on one response, caching by mask."""

    def __init__(
        self,
        space: ModelSpace,
        design: CodedDesign,
        y: np.ndarray,
        family: Family,
        gamma: float | None = None,
    ) -> None:
        """Initialize with the space and data shared by every fit."""
        self.space = space
        self.design = design
        self.y = np.asarray(y, dtype=float)
        self.family = family
        self.gamma = settings.ebic_gamma if gamma is None else gamma
        self._cache: dict[int, ScoredModel] = {}

    def score(self, mask: int) -> ScoredModel:
        """Fit and score a model; fit failures are flagged with EBIC +inf."""
        if mask in self._cache:
            return self._cache[mask]
        model = ModelId(mask=mask)
        columns = model_columns(self.space, model)
        included = k_free(self.space, model)
        flag = None
        try:
            fit = glm_service.fit(self.y, self.design.matrix[:, columns], self.family)
            if fit.degenerate:
                flag = "degenerate"
        except FitError as error:
            logger.warning(f"Model {mask:#b} flagged: {type(error).__name__}: {error}")
            fit = None
            flag = type(error).__name__
        scored = ScoredModel(
            model=model,
            columns=columns,
            fit=fit,
            ebic=ebic(fit, included, self.space.p_free, len(self.y), self.gamma),
            k_free=included,
            flag=flag,
        )
        self._cache[mask] = scored
        return scored

    def ebic_of(self, mask: int) -> float:
        return self.score(mask).ebic


def _normalize(scored: list[ScoredModel]) -> list[ScoredModel]:
    ordered = sorted(scored, key=lambda model: (model.ebic, model.model.mask))
    return [
        model.model_copy(update={"weight": float(weight)})
        for model, weight in zip(ordered, weights(model.ebic for model in ordered))
    ]


def enumerate_models(
    space: ModelSpace,
    design: CodedDesign,
    y: np.ndarray,
    family: Family,
    gamma: float | None = None,
    cap: int | None = None,
    workers: int | None = None,
) -> Exploration:
    """Fit and score every heredity-valid model.

    Weights are normalized over the complete space; models are ordered by
    (EBIC, mask) regardless of the number of workers.

    Raises:
        EnumerationCapError: If the space holds more than ``cap`` models
        NoValidModelError: If no model could be fitted
    """
    cap = settings.enumeration_cap if cap is None else cap
    workers = settings.workers if workers is None else workers
    masks = _valid_masks(space, cap)
    logger.info(f"Enumerating {len(masks)} models ({len(space.free_blocks)} free blocks)")
    scorer = ModelScorer(space, design, y, family, gamma)
    if workers > 1:
        with ThreadPoolExecutor(max_workers=workers) as pool:
            scored = list(pool.map(scorer.score, masks))
    else:
        scored = [scorer.score(mask) for mask in masks]
    return Exploration(engine="enumerate", models=_normalize(scored), space_size=len(masks))


def gibbs_search(
    space: ModelSpace,
    design: CodedDesign,
    y: np.ndarray,
    family: Family,
    iters: int | None = None,
    burnin: int | None = None,
    seed: int = 0,
    gamma: float | None = None,
) -> Exploration:
    """Systematic-scan Gibbs sampling over block-inclusion indicators.

    Each sweep visits every free block and sets it on with probability
    proportional to exp(-EBIC / 2) of the two resulting models. Switching a
    parent off also switches off its dependent interactions; an interaction
    whose parents are absent stays off. Weights are renormalized over every
    state the chain occupied; visit counts exclude the burn-in.

    Raises:
        ConfigurationError: Unless iters > burnin >= 0
    """
    iters = settings.gibbs_iters if iters is None else iters
    burnin = settings.gibbs_burnin if burnin is None else burnin
    if not iters > burnin >= 0:
        raise ConfigurationError(f"Gibbs needs iters > burnin >= 0, got {iters}, {burnin}")

    rng = np.random.default_rng(seed)
    scorer = ModelScorer(space, design, y, family, gamma)
    parents = _parent_bits(space)
    dependents = _dependent_bits(space)
    state = (1 << len(parents)) - 1
    visited = {state}
    visits: Counter[int] = Counter()

    for iteration in range(iters):
        for position in range(len(parents)):
            on = state | 1 << position
            off = state & ~(1 << position) & ~dependents[position]
            if parents[position] & state != parents[position]:
                state = off
            else:
                e_on, e_off = scorer.ebic_of(on), scorer.ebic_of(off)
                if np.isinf(e_on) and np.isinf(e_off):
                    p_on = 0.5
                else:
                    p_on = expit((e_off - e_on) / 2.0)
                state = on if rng.random() < p_on else off
            visited.add(state)
        if iteration >= burnin:
            visits[state] += 1
        if (iteration + 1) % 1000 == 0:
            logger.debug(f"Gibbs sweep {iteration + 1}/{iters}: {len(visited)} models visited")

    logger.info(f"Gibbs search visited {len(visited)} distinct models in {iters} sweeps")
    return Exploration(
        engine="gibbs",
        models=_normalize([scorer.score(mask) for mask in sorted(visited)]),
        visits=dict(sorted(visits.items())),
        space_size=count_models(space),
    )


def explore(
    space: ModelSpace,
    design: CodedDesign,
    y: np.ndarray,
    family: Family,
    engine: str = "enumerate",
    iters: int | None = None,
    burnin: int | None = None,
    seed: int = 0,
    gamma: float | None = None,
    cap: int | None = None,
) -> Exploration:
    """Explore a space with the named engine."""
    if engine == "gibbs":
        return gibbs_search(space, design, y, family, iters, burnin, seed, gamma)
    return enumerate_models(space, design, y, family, gamma, cap)
