import logging
import math

import numpy as np

from app.agents.channel.interfaces import ChannelModelInterface
from app.agents.utils.errors import DegenerateLinkError
from app.agents.utils.scenario_config import ChannelParams
from app.agents.utils.tissue_schema import PathType


class TabulatedChannelModel(ChannelModelInterface):
    """Gain interpolated linearly in log-log space between measured points.

    Outside the table the first and last segments are extended, so the map
    stays strictly decreasing over (0, inf). The inverse is left to the
    generic numerical solver.
    """

    def __init__(self, params: ChannelParams):
        super().__init__(params.min_length)
        self.params = params
        self.logger = logging.getLogger(__name__)
        self._tables = {}
        for path in (PathType.SS, PathType.MS):
            points = params.for_path(path).table
            log_length = np.log([p[0] for p in points])
            log_gain = np.log([p[1] for p in points])
            self._tables[path] = (log_length, log_gain)

    def gain(self, path: PathType, length: float, depth: float = 0.0) -> float:
        if length <= 0:
            raise DegenerateLinkError(length)
        log_length, log_gain = self._tables[path]
        x = math.log(length)
        if x < log_length[0]:
            slope = (log_gain[1] - log_gain[0]) / (log_length[1] - log_length[0])
            value = log_gain[0] + slope * (x - log_length[0])
        elif x > log_length[-1]:
            slope = (log_gain[-1] - log_gain[-2]) / (log_length[-1] - log_length[-2])
            value = log_gain[-1] + slope * (x - log_length[-1])
        else:
            value = float(np.interp(x, log_length, log_gain))
        bonus = self.params.ms.depth_bonus ** depth if path == PathType.MS else 1.0
        return math.exp(value) * bonus
