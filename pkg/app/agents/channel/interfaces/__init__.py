from .channel_model_interface import ChannelModelInterface

__all__ = ["ChannelModelInterface"]
