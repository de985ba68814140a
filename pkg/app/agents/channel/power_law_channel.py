import logging

from app.agents.channel.interfaces import ChannelModelInterface
from app.agents.utils.errors import DegenerateLinkError
from app.agents.utils.scenario_config import ChannelParams
from app.agents.utils.tissue_schema import PathType


class PowerLawChannelModel(ChannelModelInterface):
    """Log-distance gain g0 * (L0 / L)^n with a per-cm depth bonus on M-S paths."""

    def __init__(self, params: ChannelParams):
        super().__init__(params.min_length)
        self.params = params
        self.logger = logging.getLogger(__name__)

    def _depth_factor(self, path: PathType, depth: float) -> float:
        if path != PathType.MS:
            return 1.0
        return self.params.ms.depth_bonus ** depth

    def gain(self, path: PathType, length: float, depth: float = 0.0) -> float:
        if length <= 0:
            raise DegenerateLinkError(length)
        p = self.params.for_path(path)
        ratio = self.params.reference_length / length
        return p.reference_gain * ratio ** p.path_loss_exponent * self._depth_factor(path, depth)

    def inverse_gain(self, path: PathType, gain: float, depth: float = 0.0) -> float:
        self.check_gain(path, gain, depth)
        p = self.params.for_path(path)
        scaled = p.reference_gain * self._depth_factor(path, depth) / gain
        return self.params.reference_length * scaled ** (1.0 / p.path_loss_exponent)
