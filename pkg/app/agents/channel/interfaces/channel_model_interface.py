"""Interface for tissue channel gain models."""
import math
from abc import ABC, abstractmethod

from scipy.optimize import brentq

from app.agents.utils.errors import UnreachableGainError
from app.agents.utils.tissue_schema import PathType

# upper search bound for the generic inverse, cm
_MAX_SEARCH_LENGTH = 1e6


class ChannelModelInterface(ABC):
    """
    Abstract interface for galvanic-coupling channel models.

    Implementations map a link length on a given propagation path to a
    linear power gain that is strictly decreasing in length. Models with a
    closed-form inverse override inverse_gain; the default inverse solves
    the monotone equation numerically.
    """

    def __init__(self, min_length: float):
        self.min_length = min_length

    @abstractmethod
    def gain(self, path: PathType, length: float, depth: float = 0.0) -> float:
        """
        Linear gain of a link.

        Args:
            path: Propagation path (S-S or M-S)
            length: Link length in cm, must be > 0
            depth: Implant depth in cm, only used on M-S paths

        Returns:
            float: Linear power gain

        Raises:
            DegenerateLinkError: If length <= 0
        """
        pass

    def max_gain(self, path: PathType, depth: float = 0.0) -> float:
        return self.gain(path, self.min_length, depth)

    def check_gain(self, path: PathType, gain: float, depth: float = 0.0) -> None:
        upper = self.max_gain(path, depth)
        if not (0 < gain <= upper) or math.isnan(gain):
            raise UnreachableGainError(gain, upper)

    def inverse_gain(self, path: PathType, gain: float, depth: float = 0.0) -> float:
        """
        Length at which the link gain equals the given value.

        Args:
            path: Propagation path (S-S or M-S)
            gain: Target linear gain in (0, gain(min_length)]
            depth: Implant depth in cm

        Returns:
            float: Link length in cm

        Raises:
            UnreachableGainError: If the gain cannot be produced at any length
        """
        self.check_gain(path, gain, depth)
        target = math.log(gain)

        def residual(length: float) -> float:
            return math.log(self.gain(path, length, depth)) - target

        low = self.min_length
        if residual(low) == 0:
            return low
        high = max(2 * low, 1.0)
        while residual(high) > 0:
            high *= 2
            if high > _MAX_SEARCH_LENGTH:
                raise UnreachableGainError(gain, self.max_gain(path, depth))
        return brentq(residual, low, high, xtol=1e-13, rtol=1e-12, maxiter=500)
