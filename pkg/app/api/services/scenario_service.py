"""Scenario file loading with line and field diagnostics."""
import json
import logging
from pathlib import Path
from typing import List, Union

from pydantic import ValidationError

from app.api.models.scenario import ScenarioFile

logger = logging.getLogger(__name__)


class ScenarioParseError(Exception):
    """A scenario or stored result could not be parsed; carries one diagnostic per problem."""

    def __init__(self, path: Union[str, Path], diagnostics: List[str]):
        self.path = str(path)
        self.diagnostics = diagnostics
        super().__init__(f"{self.path}: " + "; ".join(diagnostics))


def validation_diagnostics(error: ValidationError) -> List[str]:
    """Turn a pydantic error into 'field.path: message' lines."""
    lines = []
    for item in error.errors():
        location = ".".join(str(part) for part in item["loc"]) or "<root>"
        lines.append(f"{location}: {item['msg']}")
    return lines


def read_json_file(path: Union[str, Path]) -> dict:
    try:
        text = Path(path).read_text(encoding="utf-8")
    except OSError as e:
        raise ScenarioParseError(path, [f"cannot read file: {e.strerror}"]) from e
    try:
        return json.loads(text)
    except json.JSONDecodeError as e:
        raise ScenarioParseError(path, [f"line {e.lineno}, column {e.colno}: {e.msg}"]) from e


class ScenarioService:
    """Service for reading scenario files."""

    def load(self, path: Union[str, Path]) -> ScenarioFile:
        raw = read_json_file(path)
        try:
            scenario = ScenarioFile.model_validate(raw)
        except ValidationError as e:
            raise ScenarioParseError(path, validation_diagnostics(e)) from e
        logger.info(f"Loaded scenario '{scenario.name}' from {path}")
        return scenario
