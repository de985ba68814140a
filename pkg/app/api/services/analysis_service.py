"""Distribution reports: closed forms next to their Monte Carlo estimates."""
import logging
import math
from typing import Dict, Optional

from app.agents.analytics import (
    expected_link_length,
    expected_link_length_from_cdf,
    monte_carlo_expected_link_length,
    validate_grid_count_cdf,
    validate_link_length_cdf,
)
from app.api.db.storage import ResultStore

logger = logging.getLogger(__name__)

DISTRIBUTIONS_FILE = "distributions.json"


class AnalysisService:
    """Service producing the grid-count and link-length distribution reports."""

    def __init__(self, store: Optional[ResultStore] = None):
        self.store = store

    def analyze(
        self,
        threshold: float,
        c1: float,
        side: float,
        samples: int = 1_000_000,
        seed: int = 0,
    ) -> Dict:
        """
        Args:
            threshold: Threshold length in cm; the cell side is threshold / sqrt(2)
            c1: Upper bound of the uniform cell-side range [1, C1]
            side: Surface side C2 in cm split into cells
            samples: Monte Carlo draws per report
            seed: Root seed of the batch generators
        """
        lam = threshold / math.sqrt(2.0)
        link = validate_link_length_cdf(lam, samples=samples, seed=seed)
        grid = validate_grid_count_cdf(c1, side, samples=samples, seed=seed + 1)
        payload = {
            "lambda_cm": lam,
            "expected_link_cm": expected_link_length(lam),
            "expected_link_from_cdf_cm": expected_link_length_from_cdf(lam),
            "monte_carlo_link_cm": monte_carlo_expected_link_length(lam, samples=samples, seed=seed + 2),
            "reports": [link.to_dict(), grid.to_dict()],
        }
        logger.info(
            f"E[link] at lambda={lam:.4f}: closed form {payload['expected_link_cm']:.5f}, "
            f"Monte Carlo {payload['monte_carlo_link_cm']:.5f}"
        )
        if self.store is not None:
            self.store.write_json(DISTRIBUTIONS_FILE, payload)
        return payload
