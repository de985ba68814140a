from pathlib import Path
from typing import Optional, Union

from ..db.storage import ResultStore
from ..services.analysis_service import AnalysisService
from ..services.calibration_service import CalibrationService
from ..services.scenario_service import ScenarioService
from ..services.sweep_service import SweepService
from ..services.topology_service import TopologyService
from .config import settings


def get_store(out_dir: Optional[Union[str, Path]] = None) -> ResultStore:
    """Get the result store, defaulting to the configured output directory."""
    return ResultStore(out_dir or settings.DEFAULT_OUTPUT_DIR)


def get_scenario_service() -> ScenarioService:
    return ScenarioService()


def get_topology_service(out_dir: Optional[Union[str, Path]] = None) -> TopologyService:
    return TopologyService(get_store(out_dir))


def get_sweep_service(out_dir: Optional[Union[str, Path]] = None, workers: Optional[int] = None) -> SweepService:
    return SweepService(get_store(out_dir), workers=workers)


def get_calibration_service(out_dir: Optional[Union[str, Path]] = None) -> CalibrationService:
    return CalibrationService(get_store(out_dir) if out_dir else None)


def get_analysis_service(out_dir: Optional[Union[str, Path]] = None) -> AnalysisService:
    return AnalysisService(get_store(out_dir) if out_dir else None)
