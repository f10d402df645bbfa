"""Hypercomplex knowledge-graph embeddings with text-derived parts."""

from .algebra import (
    ALGEBRAS,
    DIHEDRON,
    QUATERNION,
    HVec,
    conjugate,
    euclidean_norm,
    hmul,
    inner,
    normalize,
    paper_norm,
    sq_distance,
)
from .analysis import part_cosine_matrix, shapley_sentence_importance, shapley_values
from .checkpoint import Checkpoint, load_checkpoint, save_checkpoint
from .data import Dataset, TextAssets, build_filter, load_dataset, load_text_assets
from .errors import HkgeError
from .evaluation import EvalReport, evaluate, filtered_rank
from .models import (
    MODEL_KINDS,
    ModelParams,
    entity_rep,
    init_params,
    make_query,
    relation_rep,
    resolve_wiring,
    score,
    score_all_tails,
)
from .text import Adjuster, TextTable, load_sentence_table, load_text_table
from .training import RunConfig, batch_loss, sample_negatives, train

__version__ = "0.1.0"

__all__ = [
    "ALGEBRAS",
    "DIHEDRON",
    "QUATERNION",
    "HVec",
    "conjugate",
    "euclidean_norm",
    "hmul",
    "inner",
    "normalize",
    "paper_norm",
    "sq_distance",
    "part_cosine_matrix",
    "shapley_sentence_importance",
    "shapley_values",
    "Checkpoint",
    "load_checkpoint",
    "save_checkpoint",
    "Dataset",
    "TextAssets",
    "build_filter",
    "load_dataset",
    "load_text_assets",
    "HkgeError",
    "EvalReport",
    "evaluate",
    "filtered_rank",
    "MODEL_KINDS",
    "ModelParams",
    "entity_rep",
    "init_params",
    "make_query",
    "relation_rep",
    "resolve_wiring",
    "score",
    "score_all_tails",
    "Adjuster",
    "TextTable",
    "load_text_table",
    "load_sentence_table",
    "RunConfig",
    "batch_loss",
    "sample_negatives",
    "train",
    "__version__",
]
