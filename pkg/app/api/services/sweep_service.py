"""Parameter sweeps over (value, seed) grids, run in parallel and merged deterministically."""
import logging
import math
from concurrent.futures import ProcessPoolExecutor
from dataclasses import dataclass
from typing import Dict, List, Optional, Sequence, Tuple

import numpy as np
import pandas as pd
from tqdm import tqdm

from app.agents.utils.scenario_config import ScenarioConfig
from app.api.db.storage import ResultStore
from app.api.models.scenario import ScenarioFile, SweepParam
from app.api.services.topology_service import synthesize
from app.api.utils.config import settings

logger = logging.getLogger(__name__)

RUNS_FILE = "sweep_runs.csv"
SUMMARY_FILE = "sweep_summary.csv"


@dataclass
class SweepJob:
    scenario: ScenarioFile
    param: SweepParam
    value: float
    seed: int


def _with_config(config: ScenarioConfig, **updates) -> ScenarioConfig:
    return ScenarioConfig.model_validate({**config.model_dump(), **updates})


def check_sweep_param(scenario: ScenarioFile, param: SweepParam) -> None:
    """Raise ValueError when the parameter cannot be swept on this scenario at all."""
    if param == SweepParam.N and scenario.generator is None:
        raise ValueError("sweeping n needs a generator block")


def apply_sweep_value(scenario: ScenarioFile, param: SweepParam, value: float, seed: int) -> Tuple[ScenarioFile, ScenarioConfig]:
    """
    Scenario and configuration for one sweep point.

    Raises:
        ValueError: If the parameter cannot be applied to this scenario, or
            the value is out of range for it
    """
    check_sweep_param(scenario, param)
    config = scenario.config
    if param == SweepParam.ALPHA:
        return scenario, _with_config(config, alpha=value)
    if param == SweepParam.UNIFORMITY:
        return scenario, _with_config(config, uniformity=value)
    if param == SweepParam.THRESHOLD:
        return scenario, _with_config(config, threshold_override_ss=value, threshold_override_ms=value)
    if param == SweepParam.RATE_1:
        nodes = sorted(scenario.node_models(seed), key=lambda n: n.id)
        if not nodes:
            raise ValueError("sweeping rate_1 needs at least one node")
        nodes[0] = nodes[0].model_copy(update={"data_rate": value})
        return scenario.model_copy(update={"nodes": nodes, "generator": None}), config
    if param == SweepParam.N:
        count = int(round(value))
        generator = scenario.generator.model_copy(update={"count": count})
        return scenario.model_copy(update={"generator": generator}), config
    raise ValueError(f"Unsupported sweep parameter: {param}")


def run_sweep_job(job: SweepJob) -> Dict:
    """One (value, seed) run reduced to a summary row."""
    row = {"value": job.value, "seed": job.seed, "error": ""}
    try:
        scenario, config = apply_sweep_value(job.scenario, job.param, job.value, job.seed)
        outcome = synthesize(scenario, seed=job.seed, config=config)
    except ValueError as e:
        # TopologyError and pydantic ValidationError are both ValueErrors
        row["error"] = " ".join(str(e).split())
        return row

    energy = outcome.energy
    links = outcome.run.nico.links
    first = links[0] if links else None
    row.update(
        {
            "K": outcome.result.K,
            "icap_occupied": outcome.result.icap_occupied,
            "iterations": outcome.result.iterations,
            "converged": outcome.result.converged,
            "mean_link_cm": energy.mean_link,
            "mean_implant_link_cm": energy.mean_implant_link if energy.mean_implant_link is not None else math.nan,
            "mean_pt_w": float(np.mean([link.pt for link in links])) if links else math.nan,
            "network_lifetime_days": energy.network_lifetime if math.isfinite(energy.network_lifetime) else math.nan,
            "node1_link_cm": first.length if first else math.nan,
            "max_residual_spread": energy.max_residual_spread,
            "max_implant_residual_spread": energy.max_implant_residual_spread,
            "extreme_center_savings": energy.baseline_savings("extreme_center"),
        }
    )
    return row


def summarize(runs: pd.DataFrame) -> pd.DataFrame:
    """Mean of every metric per sweep value, over the seeds that ran."""
    ok = runs[runs["error"] == ""].copy()
    if ok.empty:
        summary = runs.groupby("value", sort=True).size().rename("failed").reset_index()
        summary.insert(1, "runs", 0)
        return summary
    ok["converged"] = ok["converged"].astype(bool)
    metrics = [
        c for c in ok.columns
        if c not in ("value", "seed", "error", "converged") and pd.api.types.is_numeric_dtype(ok[c])
    ]
    summary = ok.groupby("value", sort=True)[metrics].mean().add_suffix("_mean")
    summary["K_min"] = ok.groupby("value")["K"].min()
    summary["K_max"] = ok.groupby("value")["K"].max()
    summary["runs"] = ok.groupby("value").size()
    summary["converged_fraction"] = ok.groupby("value")["converged"].mean()
    # values whose every seed failed still get a row
    summary = summary.reindex(sorted(runs["value"].unique()))
    summary["runs"] = summary["runs"].fillna(0).astype(int)
    summary = summary.rename_axis("value").reset_index()
    failed = runs[runs["error"] != ""].groupby("value").size()
    summary["failed"] = summary["value"].map(failed).fillna(0).astype(int)
    return summary


class SweepService:
    """Service for multi-seed parameter sweeps."""

    def __init__(self, store: ResultStore, workers: Optional[int] = None, progress: Optional[bool] = None):
        self.store = store
        self.workers = workers
        self.progress = settings.PROGRESS_BARS if progress is None else progress

    def run(self, scenario: ScenarioFile, param: SweepParam, values: Sequence[float], seeds: Sequence[int]) -> pd.DataFrame:
        """
        Run every (value, seed) combination and write the per-run and summary tables.

        Returns:
            pd.DataFrame: One summary row per value
        """
        jobs = [SweepJob(scenario, param, float(v), int(s)) for v in values for s in seeds]
        # fail fast on parameters that cannot apply, before spawning workers
        check_sweep_param(scenario, param)
        logger.info(f"Sweeping {param.value} over {len(values)} value(s) x {len(seeds)} seed(s)")

        rows: List[Dict]
        if self.workers == 1 or len(jobs) == 1:
            rows = [run_sweep_job(job) for job in tqdm(jobs, disable=not self.progress, desc="sweep")]
        else:
            with ProcessPoolExecutor(max_workers=self.workers) as executor:
                rows = list(
                    tqdm(executor.map(run_sweep_job, jobs), total=len(jobs), disable=not self.progress, desc="sweep")
                )

        runs = pd.DataFrame(rows).sort_values(["value", "seed"], kind="mergesort").reset_index(drop=True)
        summary = summarize(runs)
        self.store.write_csv(RUNS_FILE, runs)
        self.store.write_csv(SUMMARY_FILE, summary)
        failures = int((runs["error"] != "").sum())
        if failures:
            logger.warning(f"{failures} sweep run(s) failed, see {RUNS_FILE}")
        return summary
