"""Fitting channel and battery constants to measurements."""
import logging
import math
from dataclasses import dataclass, field
from typing import Dict, List, Sequence, Tuple

import numpy as np
import pandas as pd

from app.agents.channel.link_budget import node_lifetime
from app.agents.utils.errors import UnderdeterminedFitError
from app.agents.utils.scenario_config import ChannelParams, ChannelPathParams, LifetimeParams, ScenarioConfig
from app.agents.utils.tissue_schema import PathType

logger = logging.getLogger(__name__)

MEASUREMENT_COLUMNS = ["path", "length_cm", "pt_mw"]


@dataclass
class PathFit:
    path: PathType
    path_loss_exponent: float
    reference_gain: float
    rows: int
    residuals: List[float] = field(default_factory=list)


@dataclass
class CalibrationResult:
    channel: ChannelParams
    fits: Dict[PathType, PathFit]


def _normalize_path(value: str) -> PathType:
    text = str(value).strip().upper().replace("_", "-")
    if text in ("S-S", "SS"):
        return PathType.SS
    if text in ("M-S", "MS"):
        return PathType.MS
    raise ValueError(f"Unsupported path type: {value}")


def fit_path(lengths: Sequence[float], powers_w: Sequence[float], noise_power: float, reference_length: float,
             path: PathType) -> PathFit:
    """Least-squares fit of ln Pt = c + n ln L, mapped back to a reference gain."""
    distinct = len(set(lengths))
    if distinct < 2:
        raise UnderdeterminedFitError(path.value, distinct)
    log_length = np.log(np.asarray(lengths, dtype=float))
    log_power = np.log(np.asarray(powers_w, dtype=float))
    exponent, intercept = np.polyfit(log_length, log_power, 1)
    if exponent <= 0:
        raise ValueError(f"Fitted exponent for {path.value} is not positive: {exponent}")
    # Pt = noise / g and g = g0 (L0 / L)^n  =>  ln Pt = ln(noise) - ln g0 - n ln L0 + n ln L
    reference_gain = math.exp(math.log(noise_power) - intercept - exponent * math.log(reference_length))
    residuals = log_power - (intercept + exponent * log_length)
    return PathFit(
        path=path,
        path_loss_exponent=float(exponent),
        reference_gain=float(reference_gain),
        rows=len(log_length),
        residuals=[float(r) for r in residuals],
    )


def fit_channel_params(measurements: pd.DataFrame, config: ScenarioConfig) -> CalibrationResult:
    """
    Fit the power-law channel to (path, length_cm, pt_mw) measurements.

    Args:
        measurements: One row per measurement; identical rows are counted once
        config: Supplies the noise power and reference length

    Returns:
        CalibrationResult: Fitted parameter block and per-path fits

    Raises:
        UnderdeterminedFitError: If a path has fewer than 2 distinct lengths
    """
    missing = [c for c in MEASUREMENT_COLUMNS if c not in measurements.columns]
    if missing:
        raise ValueError(f"Measurement table is missing columns: {missing}")
    table = measurements[MEASUREMENT_COLUMNS].copy()
    table["path"] = table["path"].map(lambda value: _normalize_path(value).value)
    table = table.drop_duplicates().sort_values(["path", "length_cm", "pt_mw"])

    fits: Dict[PathType, PathFit] = {}
    for path in (PathType.SS, PathType.MS):
        rows = table[table["path"] == path.value]
        fits[path] = fit_path(
            rows["length_cm"].tolist(),
            (rows["pt_mw"] * 1e-3).tolist(),
            config.noise_power,
            config.channel.reference_length,
            path,
        )
        logger.info(
            f"Fitted {path.value}: n={fits[path].path_loss_exponent:.4f}, "
            f"g0={fits[path].reference_gain:.6e} from {fits[path].rows} rows"
        )

    def block(path: PathType) -> ChannelPathParams:
        current = config.channel.for_path(path)
        return ChannelPathParams(
            reference_gain=fits[path].reference_gain,
            path_loss_exponent=fits[path].path_loss_exponent,
            depth_bonus=current.depth_bonus,
        )

    channel = config.channel.model_copy(update={"ss": block(PathType.SS), "ms": block(PathType.MS)})
    return CalibrationResult(channel=channel, fits=fits)


def calibrate_external_factor(anchor_power: float, anchor_days: float, lifetime: LifetimeParams) -> LifetimeParams:
    """Scale the lifetime model so that anchor_power lasts anchor_days."""
    unscaled = node_lifetime(anchor_power, lifetime.model_copy(update={"external_factor": 1.0}))
    return lifetime.model_copy(update={"external_factor": anchor_days / unscaled})


def fit_lifetime_model(anchors: Sequence[Tuple[float, float]], lifetime: LifetimeParams) -> LifetimeParams:
    """
    Solve overhead power and external factor from two (Pt W, days) anchors.

    days * (Pt + overhead) is constant under the load model, which fixes
    the overhead; the external factor then matches the first anchor.
    """
    if len(anchors) != 2:
        raise ValueError("fit_lifetime_model needs exactly two anchors")
    (p1, d1), (p2, d2) = anchors
    if d1 == d2:
        raise ValueError("lifetime anchors must differ in days")
    overhead = (d2 * p2 - d1 * p1) / (d1 - d2)
    if overhead < 0:
        raise ValueError(f"anchors imply a negative overhead power: {overhead}")
    fitted = lifetime.model_copy(update={"overhead_power": overhead})
    return calibrate_external_factor(p1, d1, fitted)
