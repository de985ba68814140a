"""Command printing the distribution reports."""
import click

from app.api.utils.dependencies import get_analysis_service


@click.command("analyze")
@click.option("--threshold", type=click.FloatRange(min=0, min_open=True), default=15.0, show_default=True,
              help="Threshold link length in cm")
@click.option("--c1", type=click.FloatRange(min=1, min_open=True), default=20.0, show_default=True,
              help="Upper bound of the cell-side range [1, C1]")
@click.option("--side", type=click.FloatRange(min=0, min_open=True), default=100.0, show_default=True,
              help="Surface side in cm")
@click.option("--samples", type=click.IntRange(min=1), default=1_000_000, show_default=True)
@click.option("--seed", type=int, default=0, show_default=True)
@click.option("--out", "out_dir", type=click.Path(file_okay=False), default=None,
              help="Also write distributions.json here")
def analyze_command(threshold, c1, side, samples, seed, out_dir):
    """Compare closed-form distributions with Monte Carlo estimates."""
    payload = get_analysis_service(out_dir).analyze(threshold, c1, side, samples=samples, seed=seed)
    click.echo(f"lambda_cm={payload['lambda_cm']:.6f}")
    click.echo(f"expected_link_cm={payload['expected_link_cm']:.6f}")
    click.echo(f"expected_link_from_cdf_cm={payload['expected_link_from_cdf_cm']:.6f}")
    click.echo(f"monte_carlo_link_cm={payload['monte_carlo_link_cm']:.6f}")
    for report in payload["reports"]:
        click.echo(f"{report['name']}: ks={report['ks_distance']:.6f} samples={report['samples']}")
