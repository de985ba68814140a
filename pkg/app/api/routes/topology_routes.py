"""Commands for topology runs and parameter sweeps."""
import logging
from typing import List, Optional

import click

from app.agents.utils.errors import ScenarioInfeasibleError, TopologyError
from app.api.models.result import RunStatus
from app.api.models.scenario import SweepParam
from app.api.services.scenario_service import ScenarioParseError
from app.api.utils.dependencies import get_scenario_service, get_sweep_service, get_topology_service

logger = logging.getLogger(__name__)


def fail(ctx: click.Context, status: RunStatus, lines: List[str]):
    for line in lines:
        click.echo(f"error: {line}", err=True)
    ctx.exit(int(status))


def parse_float_list(ctx, param, value: Optional[str]) -> Optional[List[float]]:
    if value is None:
        return None
    try:
        return [float(v) for v in value.split(",") if v.strip()]
    except ValueError:
        raise click.BadParameter(f"expected comma-separated numbers, got '{value}'")


def parse_seed_list(ctx, param, value: Optional[str]) -> Optional[List[int]]:
    """Comma-separated seeds; 'a:b' expands to a..b-1."""
    if value is None:
        return None
    seeds = []
    try:
        for part in value.split(","):
            part = part.strip()
            if ":" in part:
                low, high = part.split(":", 1)
                seeds.extend(range(int(low), int(high)))
            elif part:
                seeds.append(int(part))
    except ValueError:
        raise click.BadParameter(f"expected seeds like '0,1,2' or '0:50', got '{value}'")
    if not seeds:
        raise click.BadParameter("no seeds given")
    return seeds


@click.command("run")
@click.argument("scenario_path", type=click.Path(dir_okay=False))
@click.option("--out", "out_dir", type=click.Path(file_okay=False), default=None, help="Output directory")
@click.option("--resume", "resume_path", type=click.Path(dir_okay=False), default=None,
              help="Stored topology.json to restart the iterative phase from")
@click.option("--trace", is_flag=True, help="Log every iteration record")
@click.pass_context
def run_command(ctx, scenario_path, out_dir, resume_path, trace):
    """Synthesize the topology of one scenario."""
    service = get_topology_service(out_dir)
    try:
        scenario = get_scenario_service().load(scenario_path)
        outcome = service.run(scenario, trace=trace, resume_path=resume_path)
    except ScenarioParseError as e:
        logger.error(f"Could not parse {e.path}")
        fail(ctx, RunStatus.PARSE_ERROR, [f"{e.path}: {d}" for d in e.diagnostics])
    except ScenarioInfeasibleError as e:
        logger.error(f"Scenario infeasible: {', '.join(e.node_ids)}")
        fail(ctx, RunStatus.INFEASIBLE, [str(e)])
    except (TopologyError, ValueError) as e:
        logger.error(f"Invalid scenario: {e}")
        fail(ctx, RunStatus.PARSE_ERROR, [str(e)])

    result = outcome.result
    click.echo(
        f"K={result.K} icap_occupied={result.icap_occupied} iterations={result.iterations} "
        f"termination={result.termination} out={service.store.out_dir}"
    )
    if outcome.status != RunStatus.OK:
        fail(ctx, outcome.status, [f"no convergence within {scenario.config.max_iterations} iterations"])


@click.command("sweep")
@click.argument("scenario_path", type=click.Path(dir_okay=False))
@click.option("--param", type=click.Choice([p.value for p in SweepParam]), default=None,
              help="Parameter to vary (defaults to the scenario's sweep block)")
@click.option("--values", callback=parse_float_list, default=None, help="Comma-separated values")
@click.option("--seeds", callback=parse_seed_list, default=None, help="Seeds, e.g. '0,1,2' or '0:50'")
@click.option("--workers", type=click.IntRange(min=1), default=None, help="Worker processes")
@click.option("--out", "out_dir", type=click.Path(file_okay=False), default=None, help="Output directory")
@click.pass_context
def sweep_command(ctx, scenario_path, param, values, seeds, workers, out_dir):
    """Run a parameter sweep and print the per-value summary."""
    try:
        scenario = get_scenario_service().load(scenario_path)
    except ScenarioParseError as e:
        fail(ctx, RunStatus.PARSE_ERROR, [f"{e.path}: {d}" for d in e.diagnostics])

    block = scenario.sweep
    if param is None and block is None:
        raise click.UsageError("no --param given and the scenario has no sweep block")
    param = SweepParam(param) if param is not None else block.param
    values = values or (block.values if block and block.param == param else None)
    if not values:
        raise click.UsageError(f"no values to sweep for {param.value}")
    seeds = seeds or (block.seeds if block else [scenario.seed])

    service = get_sweep_service(out_dir, workers=workers)
    try:
        summary = service.run(scenario, param, values, seeds)
    except ValueError as e:
        raise click.UsageError(str(e))
    click.echo(summary.to_string(index=False))
