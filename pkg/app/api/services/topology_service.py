"""Topology synthesis runs: scenario in, result files out."""
import logging
from dataclasses import dataclass
from pathlib import Path
from typing import Optional, Union

from pydantic import ValidationError

from app.agents.analytics import EnergyReport, energy_report, expected_link_length
from app.agents.clustering import TopologyPipeline, TopologyRun
from app.agents.clustering.nico import voronoi_regions
from app.agents.utils.scenario_config import ScenarioConfig
from app.api.db.storage import ResultStore
from app.api.models.result import RunStatus, TopologyResult
from app.api.models.scenario import ScenarioFile
from app.api.services.scenario_service import ScenarioParseError, read_json_file, validation_diagnostics

logger = logging.getLogger(__name__)

TOPOLOGY_FILE = "topology.json"
TRACE_FILE = "trace.json"
ENERGY_FILE = "energy.json"
VORONOI_FILE = "voronoi.json"


@dataclass
class RunOutcome:
    run: TopologyRun
    result: TopologyResult
    energy: EnergyReport

    @property
    def status(self) -> RunStatus:
        return RunStatus.OK if self.result.converged else RunStatus.NOT_CONVERGED


def synthesize(
    scenario: ScenarioFile,
    seed: Optional[int] = None,
    config: Optional[ScenarioConfig] = None,
    trace: bool = False,
    resume: Optional[TopologyResult] = None,
) -> RunOutcome:
    """
    Run both clustering phases for a scenario, writing nothing.

    Args:
        scenario: Parsed scenario
        seed: Generator seed, defaulting to the scenario's
        config: Configuration overriding the scenario's block
        trace: Log every iteration record at INFO
        resume: Stored topology to restart NICO from

    Returns:
        RunOutcome: Pipeline output, serializable result and energy report
    """
    seed = scenario.seed if seed is None else seed
    config = config or scenario.config
    nodes = scenario.build_nodes(seed)
    pipeline = TopologyPipeline(nodes, scenario.tissue.to_stack(), config, trace=trace)
    initial = resume.to_cluster_state({n.id: n for n in nodes}) if resume is not None else None
    run = pipeline.run(initial)
    return RunOutcome(
        run=run,
        result=TopologyResult.from_run(run, scenario.name, seed),
        energy=energy_report(run.state, run.context, run.grid),
    )


class TopologyService:
    """Service for single topology runs."""

    def __init__(self, store: ResultStore):
        self.store = store

    def load_topology(self, path: Union[str, Path]) -> TopologyResult:
        try:
            return TopologyResult.model_validate(read_json_file(path))
        except ValidationError as e:
            raise ScenarioParseError(path, validation_diagnostics(e)) from e

    def run(self, scenario: ScenarioFile, trace: bool = False, resume_path: Optional[Union[str, Path]] = None) -> RunOutcome:
        resume = self.load_topology(resume_path) if resume_path else None
        outcome = synthesize(scenario, trace=trace, resume=resume)
        self.write(outcome)
        if outcome.status == RunStatus.NOT_CONVERGED:
            logger.warning(f"Scenario '{scenario.name}': {outcome.run.nico.diagnostics.message}")
        return outcome

    def write(self, outcome: RunOutcome) -> None:
        run = outcome.run
        diagnostics = run.nico.diagnostics
        self.store.write_json(TOPOLOGY_FILE, outcome.result.model_dump(mode="json"))
        self.store.write_json(
            TRACE_FILE,
            {
                "termination": diagnostics.termination.value,
                "iterations": diagnostics.iterations,
                "records": [record.to_dict() for record in diagnostics.trace],
                "flags": [
                    {"iteration": f.iteration, "changed": f.changed, "not_clustered": list(f.not_clustered)}
                    for f in diagnostics.flags
                ],
            },
        )
        energy = outcome.energy.to_dict()
        if run.grid is not None:
            energy["grid"] = {
                "lambda_cm": run.grid.lam,
                "columns": run.grid.columns,
                "rows": run.grid.rows,
                "occupied_cells": run.grid.occupied_cells,
                "expected_planar_link_cm": expected_link_length(run.grid.lam),
            }
        self.store.write_json(ENERGY_FILE, energy)
        self.store.write_json(VORONOI_FILE, {"regions": voronoi_regions(run.state, run.context)})
        logger.info(f"Wrote topology with K={outcome.result.K} to {self.store.out_dir}")
