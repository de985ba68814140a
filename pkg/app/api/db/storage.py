"""Deterministic file store for run outputs."""
import json
import logging
from pathlib import Path
from typing import Any, Dict, Union

import pandas as pd

logger = logging.getLogger(__name__)


class ResultStore:
    """Writes JSON and CSV artifacts under one output directory.

    JSON is written with sorted keys and a trailing newline, so identical
    payloads always produce identical bytes.
    """

    def __init__(self, out_dir: Union[str, Path]):
        self.out_dir = Path(out_dir)

    def path(self, name: str) -> Path:
        return self.out_dir / name

    def write_json(self, name: str, payload: Any) -> Path:
        self.out_dir.mkdir(parents=True, exist_ok=True)
        target = self.path(name)
        target.write_text(json.dumps(payload, indent=2, sort_keys=True, allow_nan=False) + "\n", encoding="utf-8")
        logger.debug(f"Wrote {target}")
        return target

    def read_json(self, name: str) -> Dict[str, Any]:
        return json.loads(self.path(name).read_text(encoding="utf-8"))

    def write_csv(self, name: str, frame: pd.DataFrame) -> Path:
        self.out_dir.mkdir(parents=True, exist_ok=True)
        target = self.path(name)
        frame.to_csv(target, index=False, float_format="%.10g", lineterminator="\n")
        logger.debug(f"Wrote {target}")
        return target
