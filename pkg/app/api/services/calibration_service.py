"""Channel and lifetime calibration from measurement files."""
import logging
from pathlib import Path
from typing import Dict, Optional, Sequence, Tuple, Union

import pandas as pd

from app.agents.channel.calibration import (
    MEASUREMENT_COLUMNS,
    calibrate_external_factor,
    fit_channel_params,
    fit_lifetime_model,
)
from app.agents.utils.scenario_config import ScenarioConfig
from app.api.db.storage import ResultStore
from app.api.services.scenario_service import ScenarioParseError

logger = logging.getLogger(__name__)

CHANNEL_FILE = "channel.json"


class CalibrationService:
    """Service fitting the channel block (and optionally the lifetime block)."""

    def __init__(self, store: Optional[ResultStore] = None, config: Optional[ScenarioConfig] = None):
        self.store = store
        self.config = config or ScenarioConfig()

    def read_measurements(self, path: Union[str, Path]) -> pd.DataFrame:
        try:
            frame = pd.read_csv(path, skipinitialspace=True, comment="#")
        except (OSError, pd.errors.ParserError, pd.errors.EmptyDataError) as e:
            raise ScenarioParseError(path, [str(e)]) from e
        frame.columns = [str(c).strip() for c in frame.columns]
        missing = [c for c in MEASUREMENT_COLUMNS if c not in frame.columns]
        if missing:
            raise ScenarioParseError(path, [f"missing column(s): {', '.join(missing)}"])
        for column in ("length_cm", "pt_mw"):
            values = pd.to_numeric(frame[column], errors="coerce")
            bad = values.isna() | (values <= 0)
            if bad.any():
                # +2: header line plus 1-based numbering
                line = int(bad.idxmax()) + 2
                raise ScenarioParseError(path, [f"line {line}, {column}: expected a positive number"])
            frame[column] = values
        return frame[MEASUREMENT_COLUMNS]

    def calibrate(self, path: Union[str, Path], anchors: Sequence[Tuple[float, float]] = ()) -> Dict:
        """
        Fit the channel to a measurement file.

        Args:
            path: Delimited text with a path,length_cm,pt_mw header
            anchors: Optional (Pt in W, days) lifetime anchors; one anchor
                fixes the external factor, two also fit the overhead power

        Returns:
            Dict: Channel block, per-path fits with residuals and, when
            anchors were given, the lifetime block
        """
        measurements = self.read_measurements(path)
        result = fit_channel_params(measurements, self.config)
        payload = {
            "channel": result.channel.model_dump(mode="json"),
            "fits": {
                fit.path.value: {
                    "path_loss_exponent": fit.path_loss_exponent,
                    "reference_gain": fit.reference_gain,
                    "rows": fit.rows,
                    "residuals": fit.residuals,
                }
                for fit in sorted(result.fits.values(), key=lambda f: f.path.value)
            },
        }
        if len(anchors) == 1:
            (power, days), = anchors
            payload["lifetime"] = calibrate_external_factor(power, days, self.config.lifetime).model_dump(mode="json")
        elif anchors:
            lifetime = fit_lifetime_model(list(anchors), self.config.lifetime)
            payload["lifetime"] = lifetime.model_dump(mode="json")
        if self.store is not None:
            self.store.write_json(CHANNEL_FILE, payload)
        return payload
