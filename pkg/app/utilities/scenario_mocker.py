# scenario_mocker.py
"""Writes the sample scenario files and the channel measurement table."""
import json
from pathlib import Path

import pandas as pd

from app.api.models.scenario import GeneratorSpec, NodeModel, ScenarioFile, SweepSpec, TissueKind, TissueModel
from app.agents.utils.scenario_config import ScenarioConfig

# --- Configuration ---
OUT_DIR = Path(__file__).resolve().parents[2] / "scenarios"
NUM_NODES = 50
NUM_SEEDS = 50
GRID_THRESHOLDS = [8.0, 10.0, 12.0, 14.0]


def grid_sweep_scenario(count: int = NUM_NODES, seeds: int = NUM_SEEDS) -> ScenarioFile:
    """100 x 100 cm surface with iid nodes, swept over forced threshold lengths."""
    return ScenarioFile(
        name="grid_sweep",
        seed=0,
        tissue=TissueModel(),
        generator=GeneratorSpec(count=count, implant_fraction=0.5, rate_range=(1, 5)),
        config=ScenarioConfig(threshold_override_ss=14.0, threshold_override_ms=14.0),
        sweep=SweepSpec(param="threshold", values=GRID_THRESHOLDS, seeds=list(range(seeds))),
    )


def uniformity_scenario(count: int = NUM_NODES, seeds: int = NUM_SEEDS) -> ScenarioFile:
    return ScenarioFile(
        name="uniformity_sweep",
        generator=GeneratorSpec(count=count, implant_fraction=0.7),
        sweep=SweepSpec(param="uniformity", values=[0.5, 0.6, 0.7, 0.8, 0.9], seeds=list(range(seeds))),
    )


def six_node_scenario(alpha: float = 4.0, implant_depth: float = 0.0) -> ScenarioFile:
    """One implant among five surface nodes, all within one threshold of each other."""
    tissue = TissueModel(x_range=(0.0, 20.0), y_range=(0.0, 20.0))
    nodes = [
        NodeModel(id="1", x=10.0, y=10.0, z=implant_depth, tissue=TissueKind.MUSCLE, data_rate=1.0),
        NodeModel(id="2", x=7.0, y=8.0, data_rate=1.0),
        NodeModel(id="3", x=13.0, y=8.5, data_rate=1.0),
        NodeModel(id="4", x=12.5, y=13.0, data_rate=1.0),
        NodeModel(id="5", x=7.5, y=12.5, data_rate=1.0),
        NodeModel(id="6", x=10.5, y=6.5, data_rate=1.0),
    ]
    return ScenarioFile(
        name="six_node_cluster",
        tissue=tissue,
        nodes=nodes,
        config=ScenarioConfig(alpha=alpha),
        sweep=SweepSpec(param="alpha", values=[2.0, 4.0, 10.0]),
    )


def capacity_wall_scenario() -> ScenarioFile:
    """Three co-located surface nodes whose rates 4 + 4 + 5 overflow a capacity of 10."""
    nodes = [
        NodeModel(id="a", x=10.0, y=10.0, data_rate=4.0),
        NodeModel(id="b", x=12.0, y=10.0, data_rate=4.0),
        NodeModel(id="c", x=11.0, y=12.0, data_rate=5.0),
        NodeModel(id="d", x=60.0, y=60.0, z=1.5, tissue=TissueKind.MUSCLE, data_rate=2.0),
        NodeModel(id="e", x=62.0, y=61.0, z=2.0, tissue=TissueKind.MUSCLE, data_rate=1.0),
        NodeModel(id="f", x=85.0, y=20.0, data_rate=3.0),
    ]
    return ScenarioFile(name="capacity_wall", nodes=nodes, config=ScenarioConfig(capacity=10.0))


def measurements() -> pd.DataFrame:
    """Skin-to-skin and muscle-to-skin transmit power at 14 cm and 5 cm."""
    return pd.DataFrame(
        {
            "path": ["S-S", "S-S", "M-S", "M-S"],
            "length_cm": [14.0, 5.0, 14.0, 5.0],
            "pt_mw": [6.5, 0.8, 4.6, 0.2],
        }
    )


def write_scenario(scenario: ScenarioFile, out_dir: Path) -> Path:
    target = out_dir / f"{scenario.name}.json"
    payload = scenario.model_dump(mode="json", exclude_none=True)
    target.write_text(json.dumps(payload, indent=2, sort_keys=True) + "\n", encoding="utf-8")
    print(f"Wrote {target}")
    return target


def main():
    """ Write every preset and the measurement table """
    OUT_DIR.mkdir(parents=True, exist_ok=True)
    for scenario in (grid_sweep_scenario(), uniformity_scenario(), six_node_scenario(), capacity_wall_scenario()):
        write_scenario(scenario, OUT_DIR)
    measurements().to_csv(OUT_DIR / "measurements.csv", index=False, lineterminator="\n")
    print(f"Wrote {OUT_DIR / 'measurements.csv'}")


if __name__ == '__main__':
    main()
