"""Ingestion of tabular data and coding of the design matrix."""

import logging
from collections.abc import Iterable, Mapping
from pathlib import Path

import numpy as np
import pandas as pd

from bsca.exceptions import (
    CollinearityError,
    ConfigurationError,
    DataParseError,
    DegenerateSubgroupError,
    DomainError,
)
from bsca.models.data import (
    BlockKind,
    CodedDesign,
    Dataset,
    DesignBlock,
    DesignOptions,
    Family,
    Role,
    TreatmentCoding,
)

logger = logging.getLogger(__name__)


def load_csv(
    path: Path | str,
    roles: Mapping[str, Role],
    families: Mapping[str, Family] | None = None,
    categorical: Iterable[str] = (),
) -> Dataset:
    """Read a CSV file into a role-tagged dataset.

    Empty cells are missing values; rows with a missing entry in any
    role-assigned column are dropped listwise.

    Args:
        path: CSV file with a header row (UTF-8, '.' decimal separator)
        roles: Column name to role
        families: Outcome name to family (Gaussian when omitted)
        categorical: Control columns whose labels may be non-numeric

    Returns:
        Dataset with the number of dropped rows recorded

    Raises:
        ConfigurationError: If the file cannot be read or a column is missing
        DataParseError: If a non-empty cell of a numeric column is not a finite number
        DomainError: If a binomial outcome holds values outside {0, 1}
    """
    try:
        frame = pd.read_csv(
            path, dtype=str, keep_default_na=False, encoding="utf-8", skipinitialspace=True
        )
    except (OSError, pd.errors.ParserError, pd.errors.EmptyDataError) as error:
        raise ConfigurationError(f"Cannot read data file {path}: {error}") from error

    if missing := [name for name in roles if name not in frame.columns]:
        raise ConfigurationError(f"Columns missing from {path}: {missing}")

    categorical = set(categorical)
    parsed: dict[str, np.ndarray] = {}
    for name in roles:
        raw = frame[name].str.strip()
        empty = raw == ""
        if name in categorical:
            parsed[name] = _encode_labels(raw, empty)
            continue
        values = pd.to_numeric(raw.where(~empty), errors="coerce")
        unparsed = ~np.isfinite(values.to_numpy(dtype=float)) & ~empty.to_numpy()
        if bad := np.flatnonzero(unparsed).tolist():
            row = bad[0]
            raise DataParseError(row=row + 1, column=name, value=raw.iloc[row])
        parsed[name] = values.to_numpy(dtype=float)

    complete = np.all([~np.isnan(values) for values in parsed.values()], axis=0)
    dropped = int((~complete).sum())
    if dropped:
        logger.info(f"Dropped {dropped} of {len(complete)} rows with missing values")
    if not complete.any():
        raise ConfigurationError(f"No complete rows left in {path}")

    return Dataset(
        columns={name: values[complete] for name, values in parsed.items()},
        roles=dict(roles),
        families=dict(families or {}),
        dropped=dropped,
    )


def _encode_labels(raw: pd.Series, empty: pd.Series) -> np.ndarray:
    """Map category labels to float codes in sorted label order; empty becomes NaN."""
    numeric = pd.to_numeric(raw.where(~empty), errors="coerce")
    if not (numeric.isna() & ~empty).any():
        return numeric.to_numpy(dtype=float)
    levels = sorted(raw[~empty].unique())
    codes = raw.map({label: float(code) for code, label in enumerate(levels)})
    return codes.where(~empty).to_numpy(dtype=float)


def code_subgroup(membership: np.ndarray, name: str = "subgroup") -> np.ndarray:
    """Sum-to-zero coding of a binary membership indicator.

    With rho the share of members, members are coded 1 - rho and non-members
    -rho, so the coded column sums to zero and treatment main effects keep
    their average-effect interpretation when interactions enter the model.

    Raises:
        DomainError: If membership is not binary
        DegenerateSubgroupError: If every row, or no row, is a member
    """
    membership = np.asarray(membership, dtype=float)
    if not np.isin(membership, (0.0, 1.0)).all():
        raise DomainError(name, f"Subgroup '{name}' must be a 0/1 membership indicator")
    rho = membership.mean()
    if rho in (0.0, 1.0):
        raise DegenerateSubgroupError(name)
    return np.where(membership == 1.0, 1.0 - rho, -rho)


def code_treatment(
    raw: np.ndarray, coding: TreatmentCoding, name: str = "treatment"
) -> np.ndarray:
    """Code a treatment column.

    Binary treatments map the lower of their two values to -1/2 and the higher
    to +1/2; continuous treatments are divided by their maximum reportable
    exposure so that 0 is no exposure and 1 the maximum.

    Raises:
        DomainError: If a binary column does not hold exactly two values, or a
            continuous value falls outside [0, max_report]
        ConfigurationError: For ordinal codings, which expand to several columns
    """
    raw = np.asarray(raw, dtype=float)
    match coding.kind:
        case "binary":
            values = np.unique(raw)
            if len(values) != 2:
                raise DomainError(
                    name,
                    f"Binary treatment '{name}' needs exactly two distinct values, "
                    f"found {len(values)}",
                )
            return np.where(raw == values[1], 0.5, -0.5)
        case "continuous":
            if (raw < 0).any() or (raw > coding.max_report).any():
                raise DomainError(
                    name,
                    f"Treatment '{name}' has values outside [0, {coding.max_report}]",
                )
            return raw / coding.max_report
        case "identity":
            return raw.copy()
        case _:
            raise ConfigurationError(
                f"Treatment '{name}' uses ordinal coding; use code_ordinal"
            )


def code_ordinal(
    raw: np.ndarray, coding: TreatmentCoding, name: str = "treatment"
) -> dict[str, np.ndarray]:
    """Discretise an exposure into levels and code each non-reference level.

    A value falls in level ``i`` when ``cutpoints[i-1] < value <= cutpoints[i]``.
    Level 0 is the reference; every other level becomes a binary treatment
    coded +1/2 for its members and -1/2 otherwise.

    Returns:
        Ordered mapping from level column name to its coded column
    """
    raw = np.asarray(raw, dtype=float)
    levels = np.searchsorted(np.asarray(coding.cutpoints), raw, side="left")
    labels = coding.labels or [f"level{index}" for index in range(len(coding.cutpoints) + 1)]
    coded = {}
    for index, label in enumerate(labels[1:], start=1):
        members = levels == index
        if not members.any() or members.all():
            raise DomainError(name, f"Level '{label}' of treatment '{name}' is constant")
        coded[f"{name}:{label}"] = np.where(members, 0.5, -0.5)
    return coded


def _code_control(values: np.ndarray, name: str, categorical: bool):
    """Coded columns, their names and raw-scale factors for one control."""
    if categorical:
        levels = np.unique(values)
        if len(levels) < 2:
            raise CollinearityError(name)
        columns = [(values == level).astype(float) for level in levels[1:]]
        names = [f"{name}:{_level_label(level)}" for level in levels[1:]]
        return columns, names, [1.0] * len(columns)
    sd = values.std()
    if sd == 0:
        raise CollinearityError(name)
    return [(values - values.mean()) / sd], [name], [1.0 / sd]


def _level_label(level: float) -> str:
    return str(int(level)) if float(level).is_integer() else str(level)


def build_design(dataset: Dataset, options: DesignOptions | None = None) -> CodedDesign:
    """Assemble the coded design: intercept, controls, subgroup mains,
    treatments and treatment-by-subgroup interactions, in that order.

    Each control, subgroup and treatment (or ordinal level) is one block; with
    interactions on, the interaction columns of one treatment with every
    subgroup form a single block.

    Raises:
        ConfigurationError: If no outcome or no treatment is assigned
        CollinearityError: If a block is a linear combination of earlier columns
    """
    options = options or DesignOptions()
    if not dataset.names(Role.OUTCOME) or not dataset.names(Role.TREATMENT):
        raise ConfigurationError("At least one outcome and one treatment are required")

    columns: list[np.ndarray] = [np.ones(dataset.n)]
    names = ["intercept"]
    scales = [1.0]
    blocks = [DesignBlock(name="intercept", kind=BlockKind.INTERCEPT, columns=(0,))]

    def add_block(kind, block_name, new_columns, new_names, new_scales, **extra):
        start = len(columns)
        columns.extend(new_columns)
        names.extend(new_names)
        scales.extend(new_scales)
        blocks.append(
            DesignBlock(
                name=block_name,
                kind=kind,
                columns=tuple(range(start, len(columns))),
                **extra,
            )
        )

    for name in dataset.names(Role.CONTROL):
        coded, coded_names, factors = _code_control(
            dataset.columns[name], name, name in options.categorical_controls
        )
        add_block(BlockKind.CONTROL, name, coded, coded_names, factors)

    subgroup_codes = {}
    shares = {}
    for name in dataset.names(Role.SUBGROUP):
        subgroup_codes[name] = code_subgroup(dataset.columns[name], name)
        shares[name] = float(dataset.columns[name].mean())
        add_block(
            BlockKind.SUBGROUP_MAIN, name, [subgroup_codes[name]], [name], [1.0],
            subgroups=(name,),
        )

    treatment_codes = {}
    for name in dataset.names(Role.TREATMENT):
        coding = options.treatment_codings.get(name, TreatmentCoding())
        raw = dataset.columns[name]
        if coding.kind == "ordinal":
            treatment_codes.update(code_ordinal(raw, coding, name))
        else:
            treatment_codes[name] = code_treatment(raw, coding, name)
    for name, coded in treatment_codes.items():
        add_block(BlockKind.TREATMENT, name, [coded], [name], [1.0], treatment=name)

    if options.interactions and subgroup_codes:
        for name, coded in treatment_codes.items():
            add_block(
                BlockKind.INTERACTION,
                f"{name}:{'+'.join(subgroup_codes)}",
                [coded * code for code in subgroup_codes.values()],
                [f"{name}:{subgroup}" for subgroup in subgroup_codes],
                [1.0] * len(subgroup_codes),
                treatment=name,
                subgroups=tuple(subgroup_codes),
            )

    matrix = np.column_stack(columns)
    _check_collinearity(matrix, blocks)
    return CodedDesign(
        matrix=matrix,
        column_names=tuple(names),
        blocks=tuple(blocks),
        scales=tuple(scales),
        subgroup_shares=shares,
    )


def _check_collinearity(matrix: np.ndarray, blocks: list[DesignBlock]) -> None:
    """Name the first block whose columns do not raise the rank by their count."""
    rank = 0
    for block in blocks:
        width = block.columns[-1] + 1
        new_rank = np.linalg.matrix_rank(matrix[:, :width])
        if new_rank < rank + len(block.columns):
            raise CollinearityError(block.name)
        rank = new_rank


def outcome_vector(dataset: Dataset, outcome: str) -> np.ndarray:
    """The response column of an outcome."""
    if dataset.roles.get(outcome) is not Role.OUTCOME:
        raise ConfigurationError(f"'{outcome}' is not an outcome column")
    return np.asarray(dataset.columns[outcome])
