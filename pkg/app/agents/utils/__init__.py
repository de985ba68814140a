"""Domain types and formulas shared by the engines."""
from .errors import *
from .tissue_schema import Cluster, ClusterState, NodeSpec, PathType, RelayPlacement, Tissue, TissueStack
from .scenario_config import ChannelModelType, ChannelParams, ChannelPathParams, LifetimeParams, ScenarioConfig
from .geometry import capacity_ok, link_length, node_weight, uniformity_ok
