import logging
import os
from pathlib import Path

from dotenv import load_dotenv

# Load the project .env so output settings can be set without exporting them
BASE_DIR = Path(__file__).resolve().parents[3]
load_dotenv(BASE_DIR / ".env")


class Settings:
    """Application settings."""

    def __init__(self):
        # Project metadata
        self.PROJECT_NAME: str = "gcibn-topology"
        self.PROJECT_DESCRIPTION: str = "Relay placement and clustering for galvanic-coupled intra-body networks."
        self.VERSION: str = "0.1.0"

        # Output verbosity
        self.LOG_LEVEL: str = os.getenv("GCIBN_LOG_LEVEL", "INFO").upper()
        self.LOG_FORMAT: str = os.getenv("GCIBN_LOG_FORMAT", "%(asctime)s %(levelname)s %(name)s: %(message)s")
        self.PROGRESS_BARS: bool = os.getenv("GCIBN_PROGRESS", "1").lower() not in ("0", "false", "no", "off")

        # Where results go when no --out is given
        self.DEFAULT_OUTPUT_DIR: Path = Path(os.getenv("GCIBN_OUTPUT_DIR", "results"))


def configure_logging(level: str = None) -> None:
    """Set the root logger level and format from the settings (or an explicit level)."""
    logging.basicConfig(format=settings.LOG_FORMAT, force=True)
    logging.getLogger().setLevel(getattr(logging, (level or settings.LOG_LEVEL), logging.INFO))


settings = Settings()
