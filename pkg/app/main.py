import click

from app.api.routes.analysis_routes import analyze_command
from app.api.routes.calibration_routes import calibrate_command
from app.api.routes.topology_routes import run_command, sweep_command
from app.api.utils.config import configure_logging, settings


def create_application() -> click.Group:
    """Create the command-line application."""

    @click.group(name=settings.PROJECT_NAME, help=settings.PROJECT_DESCRIPTION)
    @click.version_option(settings.VERSION)
    @click.option("-v", "--verbose", is_flag=True, help="Log at DEBUG level")
    def application(verbose: bool):
        configure_logging("DEBUG" if verbose else None)

    # Register commands
    application.add_command(run_command)
    application.add_command(sweep_command)
    application.add_command(calibrate_command)
    application.add_command(analyze_command)
    return application


app = create_application()

if __name__ == "__main__":
    app()
