"""
Models for the specification lattice and its scored members.
"""

from enum import Enum
from typing import Literal

from pydantic import BaseModel, ConfigDict, Field

from bsca.models.data import BlockKind
from bsca.models.fit import GlmFit


class InclusionPolicy(str, Enum):
    """Prior inclusion policy of a block."""

    FORCED_IN = "forced-in"
    FREE = "free"


class SpaceBlock(BaseModel):
    """A block of the model space with its inclusion policy and heredity parents."""

    model_config = ConfigDict(frozen=True)

    name: str
    kind: BlockKind
    columns: tuple[int, ...]
    policy: InclusionPolicy
    parents: tuple[str, ...] = ()


class ModelSpace(BaseModel):
    """
    The lattice of candidate specifications.

    Free blocks are numbered in declaration order; bit ``i`` of a model mask
    refers to ``free_blocks[i]``.
    """

    model_config = ConfigDict(frozen=True)

    blocks: tuple[SpaceBlock, ...]

    @property
    def free_blocks(self) -> list[SpaceBlock]:
        return [block for block in self.blocks if block.policy is InclusionPolicy.FREE]

    @property
    def forced_blocks(self) -> list[SpaceBlock]:
        return [
            block for block in self.blocks if block.policy is InclusionPolicy.FORCED_IN
        ]

    def free_position(self, name: str) -> int | None:
        """Bit position of a free block, or None when the block is forced in."""
        for position, block in enumerate(self.free_blocks):
            if block.name == name:
                return position
        return None

    @property
    def p_free(self) -> int:
        """Total number of free parameters."""
        return sum(len(block.columns) for block in self.free_blocks)


class ModelId(BaseModel):
    """A model, identified by its bitmask over the free blocks."""

    model_config = ConfigDict(frozen=True)

    mask: int = Field(ge=0)

    def includes(self, position: int) -> bool:
        return bool(self.mask >> position & 1)


class ScoredModel(BaseModel):
    """A fitted model with its EBIC and normalized posterior weight."""

    model_config = ConfigDict(arbitrary_types_allowed=True, frozen=True)

    model: ModelId
    columns: tuple[int, ...]
    fit: GlmFit | None
    ebic: float
    weight: float = 0.0
    k_free: int = 0
    flag: str | None = None

    def position(self, column: int) -> int | None:
        """Index of a design column inside this model's coefficient vector."""
        try:
            return self.columns.index(column)
        except ValueError:
            return None


class Exploration(BaseModel):
    """Outcome of exploring a model space by enumeration or Gibbs sampling."""

    model_config = ConfigDict(arbitrary_types_allowed=True, frozen=True)

    engine: Literal["enumerate", "gibbs"]
    models: list[ScoredModel]
    visits: dict[int, int] = Field(default_factory=dict)
    space_size: int

    def inclusion_probabilities(self, space: ModelSpace) -> dict[str, float]:
        """Weight of the explored models containing each free block."""
        return {
            block.name: sum(
                scored.weight for scored in self.models if scored.model.includes(position)
            )
            for position, block in enumerate(space.free_blocks)
        }
