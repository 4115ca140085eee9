"""Heterogeneous network embedding with relation-structure-aware losses.

The heavy lifting happens in the `_core` extension; this package re-exports
its public surface.
"""

from ._core import (
    Embeddings,
    Graph,
    HinembedError,
    RelationStats,
    TrainReport,
    __version__,
    analyze,
    classify,
    cluster_nmi,
    link_predict,
    load_graph,
    synthesize,
    train,
)

__all__ = [
    "Embeddings",
    "Graph",
    "HinembedError",
    "RelationStats",
    "TrainReport",
    "__version__",
    "analyze",
    "classify",
    "cluster_nmi",
    "link_predict",
    "load_graph",
    "synthesize",
    "train",
]
