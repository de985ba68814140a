"""Scenario file schema: tissue volume, nodes or a node generator, config and sweep."""
from enum import Enum
from typing import List, Optional, Tuple

import numpy as np
from pydantic import BaseModel, ConfigDict, Field, field_validator, model_validator

from app.agents.utils.scenario_config import ScenarioConfig
from app.agents.utils.tissue_schema import NodeSpec, Tissue, TissueStack

DEFAULT_ENERGY_STORE = 2592.0
DEFAULT_REQUIRED_LIFETIME = 604800.0


class TissueKind(str, Enum):
    SKIN = "skin"
    MUSCLE = "muscle"


class SweepParam(str, Enum):
    """Parameters a sweep may vary."""
    ALPHA = "alpha"
    UNIFORMITY = "uniformity"
    THRESHOLD = "threshold"
    RATE_1 = "rate_1"
    N = "n"


class TissueModel(BaseModel):
    model_config = ConfigDict(extra="forbid")

    x_range: Tuple[float, float] = (0.0, 100.0)
    y_range: Tuple[float, float] = (0.0, 100.0)
    skin: float = Field(0.2, ge=0, description="Skin thickness in cm")
    fat: float = Field(0.5, ge=0, description="Fat thickness in cm")
    muscle: float = Field(4.0, ge=0, description="Muscle thickness in cm")

    def to_stack(self) -> TissueStack:
        return TissueStack(
            surface_x_range=tuple(self.x_range),
            surface_y_range=tuple(self.y_range),
            thickness_skin=self.skin,
            thickness_fat=self.fat,
            thickness_muscle=self.muscle,
        )


class NodeModel(BaseModel):
    model_config = ConfigDict(extra="forbid")

    id: str = Field(..., min_length=1)
    x: float
    y: float
    z: float = Field(0.0, ge=0, description="Depth below the skin in cm, 0 for surface nodes")
    tissue: TissueKind = TissueKind.SKIN
    data_rate: float = Field(1.0, gt=0, description="eta, in rate units")
    energy_store: float = Field(DEFAULT_ENERGY_STORE, ge=0, description="E0 in J")
    required_lifetime: float = Field(DEFAULT_REQUIRED_LIFETIME, gt=0, description="H in s")
    modulation_level: int = Field(2, ge=2)

    @model_validator(mode="after")
    def check_depth(self):
        if self.tissue == TissueKind.SKIN and self.z != 0:
            raise ValueError("surface nodes must have z = 0")
        return self

    def to_spec(self) -> NodeSpec:
        return NodeSpec(
            id=self.id,
            x=self.x,
            y=self.y,
            z=self.z,
            tissue=Tissue.MUSCLE if self.tissue == TissueKind.MUSCLE else Tissue.SKIN,
            data_rate=self.data_rate,
            energy_store=self.energy_store,
            required_lifetime=self.required_lifetime,
            modulation_level=self.modulation_level,
        )


class GeneratorSpec(BaseModel):
    """iid-uniform node placement, deterministic for a given seed."""
    model_config = ConfigDict(extra="forbid")

    count: int = Field(50, ge=0)
    implant_fraction: float = Field(0.5, ge=0, le=1)
    depth_range: Tuple[float, float] = (0.5, 3.0)
    rate_range: Tuple[int, int] = (1, 5)
    energy_store: float = Field(DEFAULT_ENERGY_STORE, ge=0)
    required_lifetime: float = Field(DEFAULT_REQUIRED_LIFETIME, gt=0)

    @field_validator("depth_range", "rate_range")
    @classmethod
    def validate_range(cls, v):
        low, high = v
        if low < 0 or high < low:
            raise ValueError(f"invalid range {v}")
        return v

    def generate(self, tissue: TissueModel, seed: int) -> List[NodeModel]:
        rng = np.random.default_rng(seed)
        xs = rng.uniform(*tissue.x_range, size=self.count)
        ys = rng.uniform(*tissue.y_range, size=self.count)
        implants = rng.random(self.count) < self.implant_fraction
        depth_high = min(self.depth_range[1], tissue.muscle)
        depths = rng.uniform(min(self.depth_range[0], depth_high), depth_high, size=self.count)
        rates = rng.integers(self.rate_range[0], self.rate_range[1] + 1, size=self.count)
        width = len(str(self.count))
        return [
            NodeModel(
                id=f"n{i + 1:0{width}d}",
                x=float(xs[i]),
                y=float(ys[i]),
                z=float(depths[i]) if implants[i] else 0.0,
                tissue=TissueKind.MUSCLE if implants[i] else TissueKind.SKIN,
                data_rate=float(rates[i]),
                energy_store=self.energy_store,
                required_lifetime=self.required_lifetime,
            )
            for i in range(self.count)
        ]


class SweepSpec(BaseModel):
    model_config = ConfigDict(extra="forbid")

    param: SweepParam
    values: List[float] = Field(..., min_length=1)
    seeds: List[int] = Field(default_factory=lambda: [0])


class ScenarioFile(BaseModel):
    """
    One scenario: either explicit nodes or a generator, never both.

    A scenario without either is accepted and rejected at run time as
    having no nodes.
    """
    model_config = ConfigDict(extra="forbid")

    name: str = "scenario"
    seed: int = 0
    tissue: TissueModel = TissueModel()
    nodes: Optional[List[NodeModel]] = None
    generator: Optional[GeneratorSpec] = None
    config: ScenarioConfig = ScenarioConfig()
    sweep: Optional[SweepSpec] = None

    @model_validator(mode="after")
    def check_node_source(self):
        if self.nodes is not None and self.generator is not None:
            raise ValueError("give either nodes or generator, not both")
        if self.nodes:
            ids = [n.id for n in self.nodes]
            duplicated = sorted({i for i in ids if ids.count(i) > 1})
            if duplicated:
                raise ValueError(f"duplicate node ids: {duplicated}")
        return self

    def node_models(self, seed: Optional[int] = None) -> List[NodeModel]:
        if self.generator is not None:
            return self.generator.generate(self.tissue, self.seed if seed is None else seed)
        return list(self.nodes or [])

    def build_nodes(self, seed: Optional[int] = None) -> List[NodeSpec]:
        return [n.to_spec() for n in self.node_models(seed)]
