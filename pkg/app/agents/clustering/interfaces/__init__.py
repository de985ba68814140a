from .clustering_phase_interface import ClusteringPhaseInterface, TopologyContext

__all__ = ["ClusteringPhaseInterface", "TopologyContext"]
