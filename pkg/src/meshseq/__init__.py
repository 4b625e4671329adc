"""meshseq: block-wise vertex tokenization, edge prediction, and face
reconstruction for triangle meshes, plus the metrics and dataset curation
around them."""

from .errors import (
    DegenerateInputError,
    MalformedSequenceError,
    MeshDataError,
    ObjFormatError,
    OutOfRangeError,
)
from .mesh_io import ManifoldReport, Mesh, load_obj, manifold_report, normalize, parse_obj, save_obj, write_obj
from .tokenizer import QuantizedMesh, TokenStats, detokenize, quantize, sample_next, token_stats, tokenize
from .face_builder import AdjacencyMatrix, adjacency_of, extract_faces, mesh_from_adjacency, threshold
from .fidelity import CellCenterEnhancer, FidelityReport, SnapOracleEnhancer, fidelity_report
from .edge_model import (
    KnnHeuristicScorer,
    ModelScorer,
    OracleScorer,
    ToyEdgeModel,
    asymmetric_loss,
    asymmetric_loss_grad,
    cross_entropy,
    edge_feature,
    l1_loss,
    score_pairs,
    spacetime_distance,
    train_toy,
)
from .filtering import CandidateMask, Ordering, bandwidth, bandwidth_mask, bfs_order, candidate_mask, filter_pipeline
from .dataset_filter import FilterVerdict, dedup, evaluate_mesh, filter_corpus
from .metrics import PointSample, ShapeScores, adjacency_f1_recall, chamfer, hausdorff, sample_surface, shape_scores

__version__ = "0.1.0"
