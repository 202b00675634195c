"""Visual link retrieval between paintings and artist influence graphs.

The pipeline: raw image embeddings are reduced with PCA, nearest-neighbor
queries (with same-artist exclusion) produce per-painting visual links,
recurring links are condensed into an undirected artist graph, and the
graph is scored with degree/closeness/betweenness centrality. ``evalkit``
draws pair samples for expert review and turns judgment files into a
precision score. The ``vlink`` console script drives the whole chain.
"""

from .corpus import (
    Corpus,
    EmbeddingMatrix,
    PaintingRecord,
    ValidationIssue,
    ValidationReport,
    load_manifest,
    read_embeddings,
    validate,
    write_embeddings,
)
from .errors import (
    ConfigError,
    EmbeddingFileError,
    ManifestError,
    ModelFileError,
    ValidationFailure,
    VlinkError,
)
from .linkgraph import (
    CentralityReport,
    CentralityRow,
    EdgeEvidence,
    InfluenceGraph,
    RankedLink,
    RankedLinkList,
    betweenness,
    build_graph,
    build_report,
    closeness,
    connected_components,
    degree,
    export_graph,
    rank_linked_artists,
    write_report_csv,
)
from .nnindex import Index, Neighbor, NeighborList, Top1Link, l2
from .nnindex import build as build_index
from .pca import PcaModel, fit, inverse_transform, load_model, save_model, transform

__all__ = [
    "CentralityReport",
    "CentralityRow",
    "ConfigError",
    "Corpus",
    "EdgeEvidence",
    "EmbeddingFileError",
    "EmbeddingMatrix",
    "Index",
    "InfluenceGraph",
    "ManifestError",
    "ModelFileError",
    "Neighbor",
    "NeighborList",
    "PaintingRecord",
    "PcaModel",
    "RankedLink",
    "RankedLinkList",
    "Top1Link",
    "ValidationFailure",
    "ValidationIssue",
    "ValidationReport",
    "VlinkError",
    "betweenness",
    "build_graph",
    "build_index",
    "build_report",
    "closeness",
    "connected_components",
    "degree",
    "export_graph",
    "fit",
    "inverse_transform",
    "l2",
    "load_manifest",
    "load_model",
    "rank_linked_artists",
    "read_embeddings",
    "save_model",
    "transform",
    "validate",
    "write_embeddings",
    "write_report_csv",
]

__version__ = "0.1.0"
