from app.agents.channel.interfaces import ChannelModelInterface
from app.agents.channel.power_law_channel import PowerLawChannelModel
from app.agents.channel.tabulated_channel import TabulatedChannelModel
from app.agents.utils.scenario_config import ChannelModelType, ChannelParams


class ChannelModelFactory:
    """Factory class for creating channel models."""

    @staticmethod
    def create_model(params: ChannelParams) -> ChannelModelInterface:
        """Create the channel model named by the parameter block."""
        if params.kind == ChannelModelType.POWER_LAW:
            return PowerLawChannelModel(params)
        elif params.kind == ChannelModelType.TABULATED:
            return TabulatedChannelModel(params)
        else:
            raise ValueError(f"Unsupported channel model: {params.kind}")
