"""Closed-form grid and link-length distributions with Monte Carlo validators.

Grid side lambda is drawn uniformly from [1, C1]; a surface of side C2 (C3)
then splits into P = ceil(C2 / lambda) (Q = ceil(C3 / lambda)) cells per
axis. Link lengths are planar distances between two independent uniform
points of one lambda-square.
"""
import logging
import math
from dataclasses import dataclass, field
from typing import Callable, List, Tuple

import numpy as np
from scipy.integrate import trapezoid
from scipy.stats import kstest

logger = logging.getLogger(__name__)

EXPECTED_UNIT_LINK = (2.0 + math.sqrt(2.0) + 5.0 * math.log(1.0 + math.sqrt(2.0))) / 15.0


@dataclass
class DistributionReport:
    name: str
    closed_form: List[Tuple[float, float]] = field(default_factory=list)
    empirical: List[Tuple[float, float]] = field(default_factory=list)
    ks_distance: float = 0.0
    samples: int = 0

    def to_dict(self) -> dict:
        return {
            "name": self.name,
            "samples": self.samples,
            "ks_distance": self.ks_distance,
            "closed_form": [list(p) for p in self.closed_form],
            "empirical": [list(p) for p in self.empirical],
        }


def _check_c1(c1: float):
    if c1 <= 1:
        raise ValueError(f"C1 must be > 1, got {c1}")


def cdf_lambda(lam, c1: float):
    """Uniform CDF of the grid side over [1, C1]."""
    _check_c1(c1)
    return np.clip((np.asarray(lam, dtype=float) - 1.0) / (c1 - 1.0), 0.0, 1.0)


def cdf_grid_axis(p, c1: float, c2: float):
    """CDF of the cell count along an axis of side C2.

    Zero below ceil(C2 / C1), one from C2 on; steps at integers.
    """
    _check_c1(c1)
    if c2 <= 0:
        raise ValueError(f"C2 must be > 0, got {c2}")
    p = np.floor(np.asarray(p, dtype=float))
    with np.errstate(divide="ignore"):
        value = 1.0 - (c2 / np.where(p > 0, p, np.nan) - 1.0) / (c1 - 1.0)
    value = np.where(p < math.ceil(c2 / c1), 0.0, value)
    value = np.where(p >= c2, 1.0, value)
    return np.clip(np.nan_to_num(value, nan=0.0), 0.0, 1.0)


def cdf_grid_count(p, q, c1: float, c2: float, c3: float):
    """Product of the per-axis cell-count CDFs."""
    return cdf_grid_axis(p, c1, c2) * cdf_grid_axis(q, c1, c3)


def cdf_link_length(r, lam: float):
    """
    CDF of the distance between two uniform points in a lambda-square.

    Args:
        r: Distance(s) in cm
        lam: Square side in cm

    Returns:
        Probability P(distance <= r), same shape as r
    """
    if lam <= 0:
        raise ValueError(f"lambda must be > 0, got {lam}")
    l = np.asarray(r, dtype=float) / lam
    t = l * l
    inner = math.pi * t - 8.0 / 3.0 * l ** 3 + 0.5 * t * t

    safe_l = np.clip(l, 1.0, math.sqrt(2.0))
    safe_t = safe_l * safe_l
    a = np.sqrt(safe_t - 1.0)
    angles = np.arcsin(1.0 / safe_l) - np.arccos(1.0 / safe_l)
    outer = 1.0 / 3.0 - 2.0 * safe_t - 0.5 * safe_t ** 2 + 4.0 / 3.0 * (2.0 * safe_t + 1.0) * a + 2.0 * safe_t * angles

    value = np.where(l < 1.0, inner, outer)
    value = np.where(l <= 0.0, 0.0, value)
    value = np.where(l >= math.sqrt(2.0), 1.0, value)
    return np.clip(value, 0.0, 1.0)


def expected_link_length(lam: float) -> float:
    if lam <= 0:
        raise ValueError(f"lambda must be > 0, got {lam}")
    return EXPECTED_UNIT_LINK * lam


def expected_link_length_from_cdf(lam: float, steps: int = 10_000) -> float:
    """Mean link length as the integral of the survival function."""
    r = np.linspace(0.0, lam * math.sqrt(2.0), steps + 1)
    return float(trapezoid(1.0 - cdf_link_length(r, lam), r))


def sample_link_lengths(rng: np.random.Generator, size: int, lam: float) -> np.ndarray:
    first = rng.uniform(0.0, lam, size=(size, 2))
    second = rng.uniform(0.0, lam, size=(size, 2))
    return np.hypot(*(first - second).T)


def sample_grid_axis(rng: np.random.Generator, size: int, c1: float, c2: float) -> np.ndarray:
    lam = rng.uniform(1.0, c1, size=size)
    return np.ceil(c2 / lam)


def _batch_generators(seed: int, batches: int) -> List[np.random.Generator]:
    return [np.random.default_rng(s) for s in np.random.SeedSequence(seed).spawn(batches)]


def _draw(sampler: Callable[[np.random.Generator, int], np.ndarray], samples: int, seed: int, batches: int) -> np.ndarray:
    batches = max(1, min(batches, samples))
    sizes = [samples // batches + (1 if i < samples % batches else 0) for i in range(batches)]
    return np.concatenate([sampler(rng, size) for rng, size in zip(_batch_generators(seed, batches), sizes)])


def _curve(xs: np.ndarray, ys: np.ndarray, points: int) -> List[Tuple[float, float]]:
    index = np.linspace(0, len(xs) - 1, min(points, len(xs))).astype(int)
    return [(float(xs[i]), float(ys[i])) for i in index]


def validate_link_length_cdf(lam: float, samples: int = 1_000_000, seed: int = 0, batches: int = 8,
                             points: int = 101) -> DistributionReport:
    """KS distance between the closed-form link-length CDF and simulated distances."""
    draws = _draw(lambda rng, n: sample_link_lengths(rng, n, lam), samples, seed, batches)
    ks = kstest(draws, lambda x: cdf_link_length(x, lam))
    grid = np.linspace(0.0, lam * math.sqrt(2.0), points)
    ordered = np.sort(draws)
    ecdf = np.arange(1, len(ordered) + 1) / len(ordered)
    report = DistributionReport(
        name="link_length",
        closed_form=list(zip(grid.tolist(), cdf_link_length(grid, lam).tolist())),
        empirical=_curve(ordered, ecdf, points),
        ks_distance=float(ks.statistic),
        samples=samples,
    )
    logger.info(f"Link-length CDF at lambda={lam}: KS={report.ks_distance:.5f} over {samples} samples")
    return report


def validate_grid_count_cdf(c1: float, c2: float, samples: int = 1_000_000, seed: int = 0,
                            batches: int = 8) -> DistributionReport:
    """Largest gap between the cell-count CDF and its empirical CDF over the integer support."""
    draws = _draw(lambda rng, n: sample_grid_axis(rng, n, c1, c2), samples, seed, batches)
    support = np.arange(math.ceil(c2 / c1), math.ceil(c2) + 1, dtype=float)
    ecdf = np.searchsorted(np.sort(draws), support, side="right") / len(draws)
    closed = cdf_grid_axis(support, c1, c2)
    report = DistributionReport(
        name="grid_count",
        closed_form=list(zip(support.tolist(), closed.tolist())),
        empirical=list(zip(support.tolist(), ecdf.tolist())),
        ks_distance=float(np.max(np.abs(ecdf - closed))),
        samples=samples,
    )
    logger.info(f"Cell-count CDF for C1={c1}, C2={c2}: KS={report.ks_distance:.5f} over {samples} samples")
    return report


def monte_carlo_expected_link_length(lam: float, samples: int = 10_000_000, seed: int = 0, batches: int = 16) -> float:
    batches = max(1, min(batches, samples))
    total = 0.0
    sizes = [samples // batches + (1 if i < samples % batches else 0) for i in range(batches)]
    for rng, size in zip(_batch_generators(seed, batches), sizes):
        total += float(sample_link_lengths(rng, size, lam).sum())
    return total / samples
