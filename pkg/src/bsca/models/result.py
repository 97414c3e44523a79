"""
Models for the result bundle of one analysis run.
"""

from pydantic import BaseModel, ConfigDict, Field

from bsca.models.data import CodedDesign
from bsca.models.gate import GateResult, OutcomeTable, PartialCorrelationResult
from bsca.models.posterior import BmaPosterior, OddsRatioSummary
from bsca.models.run_config import RunConfig
from bsca.models.space import ModelSpace


class RunResult(BaseModel):
    """Everything a run produces before it is serialized."""

    model_config = ConfigDict(arbitrary_types_allowed=True, frozen=True)

    config: RunConfig
    seed: int
    rows: int
    dropped: int = 0
    design: CodedDesign
    space: ModelSpace
    table: OutcomeTable
    gate: GateResult | None = None
    partial_correlations: dict[str, dict[str, PartialCorrelationResult]] = Field(
        default_factory=dict
    )
    subgroup_effects: dict[str, dict[str, dict[str, BmaPosterior]]] = Field(
        default_factory=dict, description="outcome -> treatment -> profile -> posterior"
    )
    odds_ratios: dict[str, dict[str, OddsRatioSummary]] = Field(default_factory=dict)
