"""
Figure renderers.

Every renderer works from the serialized results (the coefficients document and
the model or curve tables), so figures can be re-rendered from a run directory
without refitting.
"""

from typing import Any

import numpy as np
import pandas as pd

from bsca.render.svg import LinearScale, SvgDocument, label, padded

PALETTE = ["#1f77b4", "#d62728", "#2ca02c", "#9467bd", "#ff7f0e", "#8c564b", "#e377c2"]
MUTED = "#999999"


def _color(index: int) -> str:
    return PALETTE[index % len(PALETTE)]


def _interval(doc: SvgDocument, scale: LinearScale, y: float, entry: dict, color: str) -> None:
    doc.line(scale(entry["lower"]), y, scale(entry["upper"]), y, stroke=color, width=2)
    doc.circle(scale(entry["mean"]), y, 3.5, fill=color)


def _treatments(entry: dict[str, Any]) -> list[str]:
    return [
        name for name, item in entry["coefficients"].items() if item.get("kind") == "treatment"
    ]


def single_outcome(
    outcome: str, entry: dict[str, Any], models: pd.DataFrame, top_models: int = 100
) -> str:
    """Four panels for one outcome.

    Top left, the BMA density and interval of each treatment; top right, the
    per-model estimates with marker area proportional to the model weight;
    then the model weights and the block-inclusion grid of the top models.
    """
    doc = SvgDocument(920, 660, title=f"Specification averaging: {outcome}")
    treatments = _treatments(entry)
    coefficients = entry["coefficients"]
    top = models.sort_values("rank").head(top_models).reset_index(drop=True)

    # Posterior densities with point estimate and interval.
    values = []
    for name in treatments:
        values += coefficients[name]["density"]["edges"]
        values += [coefficients[name]["lower"], coefficients[name]["upper"]]
    x_scale = LinearScale(padded(values), (70, 420))
    heights = [
        height for name in treatments for height in coefficients[name]["density"]["heights"]
    ]
    y_scale = LinearScale((0.0, max(heights, default=1.0) * 1.1 or 1.0), (250, 60))
    for index, name in enumerate(treatments):
        density = coefficients[name]["density"]
        for left, right, height in zip(
            density["edges"][:-1], density["edges"][1:], density["heights"]
        ):
            doc.rect(
                x_scale(left),
                y_scale(height),
                x_scale(right) - x_scale(left),
                y_scale(0.0) - y_scale(height),
                fill=_color(index),
                opacity="0.35",
            )
        _interval(doc, x_scale, 275 + 12 * index, coefficients[name], _color(index))
    doc.line(x_scale(0.0), 60, x_scale(0.0), 250, stroke=MUTED, dash="4,3")
    doc.x_axis(x_scale, 250 + 12 * len(treatments) + 35, caption="Treatment effect")
    doc.y_axis(y_scale, 70, caption="Posterior density")

    # Summary table.
    for index, name in enumerate(treatments):
        item = coefficients[name]
        y = 400 + 18 * index
        doc.circle(78, y - 4, 4, fill=_color(index))
        doc.text(
            90,
            y,
            f"{name}: {label(item['mean'])} [{label(item['lower'])}, {label(item['upper'])}]"
            f"  P(incl) {item['p_inc']:.3f}{'  *' if item['reject'] else ''}",
            size=10,
        )
    doc.text(70, 400 + 18 * len(treatments) + 8, "* inclusion probability above threshold",
             size=9, fill="#666666")

    # Per-model estimates.
    count = max(len(top), 1)
    rank_scale = LinearScale((0.5, count + 0.5), (520, 880))
    estimate_columns = [f"est:{name}" for name in treatments]
    estimates = top[estimate_columns].to_numpy(dtype=float).ravel() if len(top) else []
    est_scale = LinearScale(padded(estimates), (250, 60))
    max_weight = float(top["weight"].max()) if len(top) else 1.0
    for index, column in enumerate(estimate_columns):
        for rank, (estimate, weight) in enumerate(zip(top[column], top["weight"]), start=1):
            if np.isfinite(estimate):
                radius = 1.0 + 6.0 * np.sqrt(weight / max_weight) if max_weight > 0 else 1.0
                doc.circle(rank_scale(rank), est_scale(estimate), radius, fill=_color(index),
                           opacity="0.7")
    doc.line(520, est_scale(0.0), 880, est_scale(0.0), stroke=MUTED, dash="4,3")
    doc.y_axis(est_scale, 520, caption="Estimate")
    doc.text(700, 48, f"Top {len(top)} models by weight", size=11, anchor="middle")

    # Model weights.
    weight_scale = LinearScale((0.0, max_weight or 1.0), (390, 300))
    bar = (rank_scale(2) - rank_scale(1)) * 0.8 if count > 1 else 20
    for rank, weight in enumerate(top["weight"], start=1):
        doc.rect(rank_scale(rank) - bar / 2, weight_scale(weight), bar,
                 weight_scale(0.0) - weight_scale(weight), fill="#555555")
    doc.y_axis(weight_scale, 520, caption="Weight")

    # Block inclusion grid.
    blocks = [column for column in top.columns if column.startswith("inc:")]
    row_height = min(16.0, 200.0 / max(len(blocks), 1))
    for row, column in enumerate(blocks):
        y = 420 + row * row_height
        doc.text(512, y + row_height * 0.75, column[4:], size=9, anchor="end")
        for rank, included in enumerate(top[column], start=1):
            if included:
                doc.rect(rank_scale(rank) - bar / 2, y + 1, bar, row_height - 2, fill="#333333")
    return doc.render()


def multi_outcome(document: dict[str, Any]) -> str:
    """Treatments by outcomes: one panel per outcome with BMA intervals.

    A diamond marks each outcome's average treatment effect; the dashed
    vertical line is the GATE when it was estimated.
    """
    outcomes = document["outcomes"]
    names = list(outcomes)
    treatments = _treatments(outcomes[names[0]]) if names else []
    gate = document.get("gate")
    panel = 190
    width = 120 + panel * max(len(names), 1)
    height = 120 + 28 * (len(treatments) + 1)
    doc = SvgDocument(width, height, title="Treatment effects across outcomes")

    values = [
        outcomes[name]["coefficients"][treatment][key]
        for name in names
        for treatment in treatments
        for key in ("lower", "upper")
    ]
    if gate:
        values.append(gate["mean"])

    for row, treatment in enumerate(treatments + ["ATE"]):
        doc.text(110, 72 + 28 * row, treatment, size=10, anchor="end")
    for column, name in enumerate(names):
        left = 120 + panel * column
        scale = LinearScale(padded(values), (left + 10, left + panel - 10))
        doc.text(left + panel / 2, 46, name, size=11, anchor="middle", weight="600")
        doc.line(scale(0.0), 56, scale(0.0), height - 60, stroke=MUTED, dash="4,3")
        coefficients = outcomes[name]["coefficients"]
        means = []
        for row, treatment in enumerate(treatments):
            item = coefficients[treatment]
            means.append(item["mean"])
            color = _color(row) if item["reject"] else MUTED
            _interval(doc, scale, 68 + 28 * row, item, color)
        if means:
            x, y = scale(float(np.mean(means))), 68 + 28 * len(treatments)
            doc.polygon([(x, y - 5), (x + 5, y), (x, y + 5), (x - 5, y)], fill="#000000")
        if gate:
            doc.line(scale(gate["mean"]), 56, scale(gate["mean"]), height - 60,
                     stroke="#d62728", dash="6,3")
        doc.x_axis(scale, height - 55)
    if gate:
        doc.text(width - 10, height - 8, f"GATE {label(gate['mean'])} (dashed)", size=10,
                 anchor="end", fill="#d62728")
    return doc.render()


def subgroup(document: dict[str, Any]) -> str:
    """Average and subgroup-specific effects of every treatment with interactions."""
    rows = []
    for outcome, entry in document["outcomes"].items():
        for treatment, effects in entry.get("subgroup_effects", {}).items():
            rows.append((f"{outcome}: {treatment} (all)", entry["coefficients"][treatment], 0))
            rows += [(f"{outcome}: {treatment} | {item['profile']}", item, 1) for item in effects]
    height = 110 + 24 * max(len(rows), 1)
    doc = SvgDocument(760, height, title="Subgroup treatment effects")
    values = [item[key] for _, item, _ in rows for key in ("lower", "upper")]
    scale = LinearScale(padded(values), (300, 730))
    doc.line(scale(0.0), 45, scale(0.0), height - 60, stroke=MUTED, dash="4,3")
    for index, (name, item, depth) in enumerate(rows):
        y = 60 + 24 * index
        doc.text(290, y + 4, name, size=10, anchor="end", weight=None if depth else "600")
        _interval(doc, scale, y, item, _color(depth))
    doc.x_axis(scale, height - 55, caption="Treatment effect")
    return doc.render()


def sca(curve: pd.DataFrame, median: float, test: dict[str, Any] | None = None) -> str:
    """Specification curve: sorted estimates over the specification indicator grid."""
    curve = curve.sort_values("rank").reset_index(drop=True)
    indicators: list[tuple[str, pd.Series]] = []
    for outcome in dict.fromkeys(curve["outcome"]):
        indicators.append((f"outcome {outcome}", curve["outcome"] == outcome))
    for treatment in dict.fromkeys(curve["treatment"]):
        indicators.append((f"treatment {treatment}", curve["treatment"] == treatment))
    controls = curve["controls"].fillna("").astype(str)
    for control in dict.fromkeys(
        name for value in controls for name in value.split("+") if name
    ):
        indicators.append((f"control {control}", controls.str.split("+").apply(
            lambda names, control=control: control in names
        )))
    subsets = curve["subset"].fillna("").astype(str)
    for subset in dict.fromkeys(value for value in subsets if value):
        indicators.append((f"subset {subset}", subsets == subset))

    grid_top = 330
    height = grid_top + 14 * len(indicators) + 40
    doc = SvgDocument(900, height, title="Specification curve")
    count = max(len(curve), 1)
    x_scale = LinearScale((0.5, count + 0.5), (220, 880))
    lower = curve["estimate"] - 1.96 * curve["se"]
    upper = curve["estimate"] + 1.96 * curve["se"]
    y_scale = LinearScale(padded(list(lower) + list(upper)), (290, 50))

    doc.line(220, y_scale(0.0), 880, y_scale(0.0), stroke=MUTED, dash="4,3")
    doc.line(220, y_scale(median), 880, y_scale(median), stroke="#d62728", dash="6,3")
    for index, row in curve.iterrows():
        x = x_scale(index + 1)
        color = "#1f77b4" if row["significant"] else MUTED
        doc.line(x, y_scale(lower[index]), x, y_scale(upper[index]), stroke=color, width=1)
        doc.circle(x, y_scale(row["estimate"]), 2.5, fill=color)
    doc.y_axis(y_scale, 220, caption="Estimate")
    caption = f"median {label(median)}"
    if test:
        caption += f", {test['method']} test p = {test['p_value']:.4f} ({test['draws']} draws)"
    doc.text(880, 44, caption, size=10, anchor="end", fill="#d62728")

    for row, (name, used) in enumerate(indicators):
        y = grid_top + 14 * row
        doc.text(210, y + 4, name, size=9, anchor="end")
        for index, flag in enumerate(used):
            if flag:
                doc.circle(x_scale(index + 1), y, 2.5, fill="#333333")
    return doc.render()


def figure_name(outcome: str) -> str:
    """File name of an outcome's figure; characters unsafe in paths become '_'."""
    safe = "".join(char if char.isalnum() or char in "-_." else "_" for char in outcome)
    return f"single_outcome_{safe}.svg"


def run_figures(
    document: dict[str, Any], models: pd.DataFrame, top_models: int = 100
) -> dict[str, str]:
    """Every figure of a ``run``, keyed by file name."""
    figures = {
        figure_name(outcome): single_outcome(
            outcome, entry, models[models["outcome"].astype(str) == outcome], top_models
        )
        for outcome, entry in document["outcomes"].items()
    }
    if len(document["outcomes"]) > 1:
        figures["multi_outcome.svg"] = multi_outcome(document)
    if any(entry.get("subgroup_effects") for entry in document["outcomes"].values()):
        figures["subgroup.svg"] = subgroup(document)
    return figures
