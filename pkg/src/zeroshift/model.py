"""The full two-branch model: visual adapter plus prototype branch, with
checkpoint save/load.

A ``Model`` owns the trainable tensors, the fixed graph inputs (normalized
adjacency, node embeddings, class node indices), the pooled class text
embeddings, and the run configuration whose toggles select the forward
variants. It never sees evaluation labels.
"""

from __future__ import annotations

from dataclasses import dataclass
from pathlib import Path

import numpy as np

from .adapter import AdapterParams, adapt_batch, adapt_text, init_adapter
from .autodiff import Tensor
from .config import RunConfig, load_config
from .errors import FileFormatError, ShapeError
from .io import ClassGraph, load_embedding_container, save_embedding_container
from .prototypes import (
    PrototypeParams,
    forward_prototypes,
    init_prototype_params,
    normalize_adjacency,
    pool_synonyms,
)

CHECKPOINT_PARAMS = "params.emb"
CHECKPOINT_NAMES = "params.names"
CHECKPOINT_CONFIG = "config.txt"


def seed_streams(seed: int) -> dict[str, np.random.Generator]:
    """All of a run's randomness, split into independent named streams so
    turning a component off never shifts another component's draws."""
    children = np.random.SeedSequence(seed).spawn(4)
    names = ("adapter_init", "prototype_init", "source_shuffle", "target_shuffle")
    return {n: np.random.default_rng(s) for n, s in zip(names, children)}


@dataclass
class Model:
    adapter: AdapterParams
    prototype: PrototypeParams
    node_embeddings: np.ndarray  # class rows hold the pooled text embeddings
    adjacency: np.ndarray  # symmetric-normalized, self-loops included
    class_nodes: np.ndarray
    class_text: np.ndarray  # pooled per-class text embeddings, unit rows
    config: RunConfig

    @property
    def num_classes(self) -> int:
        return len(self.class_nodes)

    def named_tensors(self) -> list[tuple[str, Tensor]]:
        return self.adapter.named_tensors() + self.prototype.named_tensors()

    def prototypes(self) -> Tensor:
        return forward_prototypes(
            self.node_embeddings,
            self.adjacency,
            self.class_nodes,
            self.prototype,
            use_gcn=self.config.use_gcn,
            use_residual=self.config.use_residual_projector,
        )

    def adapt_images(self, features) -> Tensor:
        return adapt_batch(
            features, self.adapter, use_attention=self.config.use_attention_adapter
        )

    def adapt_class_text(self) -> Tensor:
        return adapt_text(
            self.class_text, self.adapter, use_attention=self.config.use_attention_adapter
        )


def build_model(graph: ClassGraph, synonyms, config: RunConfig) -> Model:
    """Assemble a fresh model from a relation graph and per-class synonym
    embeddings. Class rows of the node embeddings are replaced by the pooled
    synonyms so the text branch has a single source of truth."""
    config.validate()
    pooled = pool_synonyms(synonyms)
    if pooled.shape[0] != graph.num_classes:
        raise ShapeError(
            f"{pooled.shape[0]} synonym classes for {graph.num_classes} class nodes"
        )
    dim = pooled.shape[1]
    if graph.node_init.shape[1] != dim:
        raise ShapeError(
            f"node dim {graph.node_init.shape[1]} vs text dim {dim}"
        )
    node_embeddings = np.asarray(graph.node_init, dtype=np.float64).copy()
    node_embeddings[np.asarray(graph.class_nodes, dtype=np.intp)] = pooled
    streams = seed_streams(config.seed)
    return Model(
        adapter=init_adapter(dim, config.token_count, streams["adapter_init"]),
        prototype=init_prototype_params(dim, rng=streams["prototype_init"]),
        node_embeddings=node_embeddings,
        adjacency=normalize_adjacency(graph),
        class_nodes=np.asarray(graph.class_nodes, dtype=np.intp),
        class_text=pooled,
        config=config,
    )


def save_checkpoint(model: Model, directory) -> None:
    """Write every parameter matrix, the name of each, and the config."""
    d = Path(directory)
    d.mkdir(parents=True, exist_ok=True)
    named = model.named_tensors()
    save_embedding_container(d / CHECKPOINT_PARAMS, [t.data for _, t in named])
    (d / CHECKPOINT_NAMES).write_text("".join(name + "\n" for name, _ in named))
    model.config.save(d / CHECKPOINT_CONFIG)


def load_checkpoint(directory, graph: ClassGraph, synonyms) -> Model:
    """Rebuild a model from a checkpoint plus the benchmark it was trained
    on. Parameters are restored from the checkpoint bytes (32-bit on disk);
    graph inputs are recomputed from the benchmark files."""
    d = Path(directory)
    config = load_config(d / CHECKPOINT_CONFIG)
    model = build_model(graph, synonyms, config)
    matrices = load_embedding_container(d / CHECKPOINT_PARAMS)
    names = (d / CHECKPOINT_NAMES).read_text().split()
    named = model.named_tensors()
    if names != [n for n, _ in named]:
        raise FileFormatError(f"checkpoint parameter names disagree: {names}")
    if len(matrices) != len(named):
        raise FileFormatError(
            f"checkpoint holds {len(matrices)} matrices, expected {len(named)}"
        )
    for (name, tensor), mat in zip(named, matrices):
        if mat.shape != tensor.data.shape:
            raise FileFormatError(
                f"checkpoint {name} has shape {mat.shape}, expected {tensor.data.shape}"
            )
        tensor.data = mat
    return model
