from .grid_partitioner import GridSpec, IcapPhase, grid_size, grid_thresholds, partition

__all__ = ["GridSpec", "IcapPhase", "grid_size", "grid_thresholds", "partition"]
