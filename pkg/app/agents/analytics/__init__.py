"""Closed-form distributions, Monte Carlo validators and energy reporting."""
from .distributions import (
    DistributionReport,
    cdf_grid_axis,
    cdf_grid_count,
    cdf_lambda,
    cdf_link_length,
    expected_link_length,
    expected_link_length_from_cdf,
    monte_carlo_expected_link_length,
    sample_grid_axis,
    sample_link_lengths,
    validate_grid_count_cdf,
    validate_link_length_cdf,
)
from .energy_report import ClusterEnergy, EnergyReport, cluster_energy, energy_report

__all__ = [
    "DistributionReport",
    "cdf_grid_axis",
    "cdf_grid_count",
    "cdf_lambda",
    "cdf_link_length",
    "expected_link_length",
    "expected_link_length_from_cdf",
    "monte_carlo_expected_link_length",
    "sample_grid_axis",
    "sample_link_lengths",
    "validate_grid_count_cdf",
    "validate_link_length_cdf",
    "ClusterEnergy",
    "EnergyReport",
    "cluster_energy",
    "energy_report",
]
