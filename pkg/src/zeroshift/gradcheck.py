"""Finite-difference verification of every loss gradient.

Each loss is evaluated through the full pipeline (graph forward, adapter
forward, loss) so the check covers every parameter in both partitions.
Numeric gradients use central differences; the comparison uses a mixed
relative error that tolerates near-zero entries:

    err = |analytic - numeric| / max(1, |analytic|, |numeric|)

During the numeric sweeps the tape is switched off (requires_grad=False)
so perturbed forwards run without recording, and the stage a perturbation
cannot affect is computed once and reused.
"""

from __future__ import annotations

from dataclasses import dataclass

import numpy as np

from .adapter import AdapterParams, adapt_batch, adapt_text, init_adapter
from .autodiff import Tensor, gradients
from .errors import ConfigError
from .io import ClassGraph
from .losses import align_loss, ce_loss, info_loss, ranking_loss, srs_loss_batch
from .prototypes import (
    PrototypeParams,
    forward_prototypes,
    init_prototype_params,
    normalize_adjacency,
)
from .synth import balanced_tree

LOSS_NAMES = ("ce", "ranking", "info", "srs", "align")
DEFAULT_STEP = 1e-6
TOLERANCE = 1e-5


@dataclass
class CheckInstance:
    adapter: AdapterParams
    prototype: PrototypeParams
    node_embeddings: np.ndarray
    adjacency: np.ndarray
    class_nodes: np.ndarray
    features: np.ndarray
    labels: np.ndarray
    text: np.ndarray
    temperature: float = 30.0
    margin: float = 0.1

    def protos(self) -> Tensor:
        return forward_prototypes(
            self.node_embeddings, self.adjacency, self.class_nodes, self.prototype
        )

    def images(self) -> Tensor:
        return adapt_batch(self.features, self.adapter)

    def adapted_text(self) -> Tensor:
        return adapt_text(self.text, self.adapter)

    def all_params(self) -> list[tuple[str, Tensor]]:
        return self.adapter.named_tensors() + self.prototype.named_tensors()


def build_instance(seed: int, num_classes: int = 6, dim: int = 16,
                   token_count: int = 4, batch: int = 4) -> CheckInstance:
    """A small random end-to-end setup: tree relation graph over the
    classes, random unit node embeddings, random features and labels."""
    rng = np.random.default_rng(seed)
    edges, _, _, node_count = balanced_tree(num_classes)
    node_init = rng.standard_normal((node_count, dim))
    node_init /= np.linalg.norm(node_init, axis=1, keepdims=True)
    graph = ClassGraph(
        node_count=node_count,
        edges=sorted(edges),
        class_nodes=np.arange(num_classes, dtype=np.int64),
        node_init=node_init,
    )
    return CheckInstance(
        adapter=init_adapter(dim, token_count, rng),
        prototype=init_prototype_params(dim, rng=rng),
        node_embeddings=node_init,
        adjacency=normalize_adjacency(graph),
        class_nodes=np.arange(num_classes, dtype=np.intp),
        features=rng.standard_normal((batch, dim)),
        labels=rng.integers(0, num_classes, size=batch),
        text=rng.standard_normal((num_classes, dim)),
    )


def _loss_value(name: str, inst: CheckInstance, protos: Tensor,
                v: Tensor | None, text_v: Tensor | None) -> Tensor:
    if name == "ce":
        return ce_loss(v, protos, inst.labels, inst.temperature)
    if name == "ranking":
        return ranking_loss(v, protos, inst.labels, inst.margin)
    if name == "info":
        return info_loss(v, protos, inst.temperature)
    if name == "srs":
        return srs_loss_batch(v, protos, inst.labels)
    if name == "align":
        return align_loss(text_v, protos, inst.temperature)
    raise ConfigError(f"unknown loss {name!r}")


def _full_loss(name: str, inst: CheckInstance) -> Tensor:
    text_v = inst.adapted_text() if name == "align" else None
    v = None if name == "align" else inst.images()
    return _loss_value(name, inst, inst.protos(), v, text_v)


def _fd_grad(fn, tensor: Tensor, h: float) -> np.ndarray:
    grad = np.zeros(tensor.data.size)
    flat = tensor.data.reshape(-1)
    for j in range(flat.size):
        orig = flat[j]
        flat[j] = orig + h
        f_plus = float(fn().data)
        flat[j] = orig - h
        f_minus = float(fn().data)
        flat[j] = orig
        grad[j] = (f_plus - f_minus) / (2.0 * h)
    return grad.reshape(tensor.data.shape)


def max_relative_error(analytic: np.ndarray, numeric: np.ndarray) -> float:
    scale = np.maximum(1.0, np.maximum(np.abs(analytic), np.abs(numeric)))
    return float(np.max(np.abs(analytic - numeric) / scale))


def check_loss(name: str, inst: CheckInstance, h: float = DEFAULT_STEP) -> dict:
    """Max mixed relative error per parameter for one loss."""
    named = inst.all_params()
    tensors = [t for _, t in named]
    analytic = dict(zip(
        [n for n, _ in named], gradients(_full_loss(name, inst), tensors)
    ))

    for t in tensors:
        t.requires_grad = False
    try:
        errors = {}
        uses_text = name == "align"
        # adapter sweep: the graph branch cannot move, freeze its output
        protos_fixed = inst.protos()
        for pname, tensor in inst.adapter.named_tensors():
            def fn():
                text_v = inst.adapted_text() if uses_text else None
                v = None if uses_text else inst.images()
                return _loss_value(name, inst, protos_fixed, v, text_v)
            errors[pname] = max_relative_error(analytic[pname], _fd_grad(fn, tensor, h))
        # prototype sweep: the adapter side cannot move, freeze its output
        text_fixed = inst.adapted_text() if uses_text else None
        v_fixed = None if uses_text else inst.images()
        for pname, tensor in inst.prototype.named_tensors():
            def fn():
                return _loss_value(name, inst, inst.protos(), v_fixed, text_fixed)
            errors[pname] = max_relative_error(analytic[pname], _fd_grad(fn, tensor, h))
    finally:
        for t in tensors:
            t.requires_grad = True
    return errors


def check_all(seed: int, num_classes: int = 6, dim: int = 16, token_count: int = 4,
              h: float = DEFAULT_STEP) -> dict:
    """Errors for every loss on one seeded instance: {loss: {param: err}}."""
    inst = build_instance(seed, num_classes, dim, token_count)
    return {name: check_loss(name, inst, h) for name in LOSS_NAMES}
