"""Domain-adaptive zero-shot learning in embedding space.

Trains a small attention adapter over frozen visual features together with
a graph-convolution prototype branch over class text embeddings, entirely
on precomputed embeddings: no encoder, no images, no tokenizer. Includes a
minimal reverse-mode autodiff core, bit-exact file formats, a seeded
synthetic benchmark, a two-phase trainer, and the seen/unseen/harmonic
evaluation protocol.
"""

from .adapter import AdapterParams, adapt, adapt_batch, adapt_text, init_adapter
from .autodiff import Tensor, gradients
from .config import RunConfig, load_config, parse_items
from .errors import (
    ConfigError,
    DataValidationError,
    DegenerateVectorError,
    FileFormatError,
    FileSizeError,
    GraphError,
    ShapeError,
    TrainingError,
    ZeroShiftError,
)
from .evaluation import (
    EvalReport,
    classify,
    classify_batch,
    evaluate,
    export_features,
    h_score,
    pca_top2,
    zero_shot_baseline,
)
from .io import (
    ClassGraph,
    DatasetBundle,
    load_benchmark,
    load_embeddings,
    load_graph,
    save_benchmark,
    save_embeddings,
    save_graph,
)
from .losses import (
    LossBreakdown,
    align_loss,
    ce_loss,
    compose,
    info_loss,
    ranking_loss,
    srs_loss,
    srs_loss_batch,
)
from .model import Model, build_model, load_checkpoint, save_checkpoint
from .prototypes import (
    PrototypeParams,
    forward_prototypes,
    init_prototype_params,
    normalize_adjacency,
    pool_synonyms,
)
from .synth import synth_generate
from .trainer import TrainState, joint_train, optimizer_step, train_run, warmup

__version__ = "0.1.0"

__all__ = [
    "AdapterParams",
    "ClassGraph",
    "ConfigError",
    "DataValidationError",
    "DatasetBundle",
    "DegenerateVectorError",
    "EvalReport",
    "FileFormatError",
    "FileSizeError",
    "GraphError",
    "LossBreakdown",
    "Model",
    "PrototypeParams",
    "RunConfig",
    "ShapeError",
    "Tensor",
    "TrainState",
    "TrainingError",
    "ZeroShiftError",
    "adapt",
    "adapt_batch",
    "adapt_text",
    "align_loss",
    "build_model",
    "ce_loss",
    "classify",
    "classify_batch",
    "compose",
    "evaluate",
    "export_features",
    "forward_prototypes",
    "gradients",
    "h_score",
    "info_loss",
    "init_adapter",
    "init_prototype_params",
    "joint_train",
    "load_benchmark",
    "load_checkpoint",
    "load_config",
    "load_embeddings",
    "load_graph",
    "normalize_adjacency",
    "optimizer_step",
    "parse_items",
    "pca_top2",
    "pool_synonyms",
    "ranking_loss",
    "save_benchmark",
    "save_checkpoint",
    "save_embeddings",
    "save_graph",
    "srs_loss",
    "srs_loss_batch",
    "synth_generate",
    "train_run",
    "warmup",
    "zero_shot_baseline",
]
