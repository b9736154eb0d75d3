"""Coin die-link screening from photographs.

Scores every pair of same-type coin images with a registration + SSIM
distance in [0, 1], ranks pairs ascending so the likeliest die links come
first, and backs an interactive review workflow (evaluations, comments,
CSV export, distance curve, 2-D cluster view).
"""

from .analytics import (
    ClusterLabel,
    DistanceCurve,
    EmbeddingPoint,
    RankedPairs,
    build_curve,
    cluster,
    embed_2d,
    rank_pairs,
)
from .imaging import (
    EffectiveSize,
    GrayImage,
    NormalizedImage,
    estimate_effective_size,
    load_image,
    load_normalized,
    normalize,
)
from .notations import Note, NotationRow, export_filename, read_rows, write_rows
from .registration import (
    Keypoints,
    MatchSet,
    SimilarityTransform,
    TransformFit,
    detect_keypoints,
    estimate_transform,
    match_keypoints,
    warp,
)
from .scoring import (
    DistanceMatrix,
    PairScore,
    pair_distance,
    pair_seed,
    score_dataset,
    ssim,
)

__version__ = "0.1.0"

__all__ = [
    "ClusterLabel",
    "DistanceCurve",
    "DistanceMatrix",
    "EffectiveSize",
    "EmbeddingPoint",
    "GrayImage",
    "Keypoints",
    "MatchSet",
    "NormalizedImage",
    "NotationRow",
    "Note",
    "PairScore",
    "RankedPairs",
    "SimilarityTransform",
    "TransformFit",
    "build_curve",
    "cluster",
    "detect_keypoints",
    "embed_2d",
    "estimate_effective_size",
    "estimate_transform",
    "export_filename",
    "load_image",
    "load_normalized",
    "match_keypoints",
    "normalize",
    "pair_distance",
    "pair_seed",
    "rank_pairs",
    "read_rows",
    "score_dataset",
    "ssim",
    "warp",
    "write_rows",
]
