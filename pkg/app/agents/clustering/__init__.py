"""
Clustering Package

Two-phase topology synthesis for galvanic-coupled intra-body networks.

Phases:
- ICAP: grid partition of the surface sized from the node thresholds
- NICO: iterative relay optimization, eviction, reassignment and merging

Usage:
    from app.agents.clustering import TopologyPipeline

    run = TopologyPipeline(nodes, stack, config).run()
    print(run.K, run.icap_occupied)
"""
from .interfaces import ClusteringPhaseInterface, TopologyContext
from .topology_pipeline import TopologyPipeline, TopologyRun

__all__ = ["ClusteringPhaseInterface", "TopologyContext", "TopologyPipeline", "TopologyRun"]
