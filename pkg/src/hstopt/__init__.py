"""Exact combinatorial optimisation on random points in balanced HSTs."""
from .hst import HstParams, NodeId, ROOT, distance, leaf_distance
from .sampling import ColoredSample, LeafMultiset, sample_colored, sample_leaves

__version__ = "0.1.0"

__all__ = [
    "HstParams", "NodeId", "ROOT", "distance", "leaf_distance",
    "ColoredSample", "LeafMultiset", "sample_colored", "sample_leaves",
    "__version__",
]
