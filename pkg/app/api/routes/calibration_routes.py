"""Command fitting the channel model to measurements."""
import json
import logging

import click

from app.agents.utils.errors import UnderdeterminedFitError
from app.api.models.result import RunStatus
from app.api.routes.topology_routes import fail
from app.api.services.scenario_service import ScenarioParseError
from app.api.utils.dependencies import get_calibration_service

logger = logging.getLogger(__name__)


def parse_anchor(ctx, param, values):
    anchors = []
    for value in values:
        try:
            power_mw, days = value.split(":")
            anchors.append((float(power_mw) * 1e-3, float(days)))
        except ValueError:
            raise click.BadParameter(f"expected PT_MW:DAYS, got '{value}'")
    if len(anchors) > 2:
        raise click.BadParameter("at most two lifetime anchors")
    return anchors


@click.command("calibrate")
@click.argument("measurements_path", type=click.Path(dir_okay=False))
@click.option("--anchor", "anchors", multiple=True, callback=parse_anchor,
              help="Lifetime anchor PT_MW:DAYS, e.g. 2:254 (repeat for a two-anchor fit)")
@click.option("--out", "out_dir", type=click.Path(file_okay=False), default=None,
              help="Also write channel.json here")
@click.pass_context
def calibrate_command(ctx, measurements_path, anchors, out_dir):
    """Fit path-loss exponents and reference gains per path type."""
    service = get_calibration_service(out_dir)
    try:
        payload = service.calibrate(measurements_path, anchors)
    except ScenarioParseError as e:
        fail(ctx, RunStatus.PARSE_ERROR, [f"{e.path}: {d}" for d in e.diagnostics])
    except UnderdeterminedFitError as e:
        logger.error(str(e))
        fail(ctx, RunStatus.INFEASIBLE, [str(e)])
    except ValueError as e:
        fail(ctx, RunStatus.PARSE_ERROR, [str(e)])
    click.echo(json.dumps(payload, indent=2, sort_keys=True))
