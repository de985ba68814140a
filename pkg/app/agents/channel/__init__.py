"""Tissue channel models, link budgets and calibration."""
from .interfaces import ChannelModelInterface
from .power_law_channel import PowerLawChannelModel
from .tabulated_channel import TabulatedChannelModel
from .channel_factory import ChannelModelFactory
from .link_budget import (
    NodeBudget,
    PowerBounds,
    compute_node_budgets,
    energy_over_period,
    link_power,
    node_lifetime,
    power_bounds,
    pt_max,
    pt_min,
    threshold_length,
)

__all__ = [
    "ChannelModelInterface",
    "PowerLawChannelModel",
    "TabulatedChannelModel",
    "ChannelModelFactory",
    "NodeBudget",
    "PowerBounds",
    "compute_node_budgets",
    "energy_over_period",
    "link_power",
    "node_lifetime",
    "power_bounds",
    "pt_max",
    "pt_min",
    "threshold_length",
]
