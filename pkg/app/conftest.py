import numpy as np
import pytest

from app.agents.channel import ChannelModelFactory
from app.agents.utils import NodeSpec, ScenarioConfig, Tissue, TissueStack

DEFAULT_ENERGY_J = 2592.0
DEFAULT_LIFETIME_S = 604800.0


def build_node(node_id, x, y, z=0.0, tissue=None, rate=1.0, energy=DEFAULT_ENERGY_J,
               lifetime=DEFAULT_LIFETIME_S, modulation=2):
    if tissue is None:
        tissue = Tissue.MUSCLE if z > 0 else Tissue.SKIN
    return NodeSpec(
        id=node_id, x=x, y=y, z=z, tissue=tissue, data_rate=rate,
        energy_store=energy, required_lifetime=lifetime, modulation_level=modulation,
    )


@pytest.fixture
def config():
    return ScenarioConfig()


@pytest.fixture
def stack():
    return TissueStack(
        surface_x_range=(0.0, 100.0),
        surface_y_range=(0.0, 100.0),
        thickness_skin=0.2,
        thickness_fat=0.5,
        thickness_muscle=4.0,
    )


@pytest.fixture
def channel(config):
    return ChannelModelFactory.create_model(config.channel)


@pytest.fixture
def make_node():
    return build_node


@pytest.fixture
def make_context(stack):
    """Run context for a node list, budgets derived as in a real run."""
    from app.agents.clustering import TopologyPipeline

    def build(nodes, config=None, volume=None):
        return TopologyPipeline(nodes, volume or stack, config or ScenarioConfig()).build_context()

    return build


def build_random_nodes(seed, count=50, side=100.0, implant_fraction=0.5, depth=(0.5, 3.0), rates=(1, 5)):
    """iid-uniform nodes on a side x side surface."""
    rng = np.random.default_rng(seed)
    nodes = []
    for i in range(count):
        implant = rng.random() < implant_fraction
        z = float(rng.uniform(*depth)) if implant else 0.0
        nodes.append(
            build_node(f"n{i:02d}", float(rng.uniform(0, side)), float(rng.uniform(0, side)), z=z,
                       tissue=Tissue.MUSCLE if implant else Tissue.SKIN,
                       rate=float(rng.integers(rates[0], rates[1] + 1)))
        )
    return nodes
