"""Class prototype branch: synonym pooling, graph normalization, and a
two-layer graph convolution with a linear residual.

The graph convolution propagates class-name embeddings over the relation
graph so each prototype absorbs its neighbors' structure; the residual
projection keeps the original text semantics from washing out. Prototype
rows come out unit-norm, so prototype dot products are cosine
similarities.
"""

from __future__ import annotations

from dataclasses import dataclass

import numpy as np

from . import autodiff as ad
from .autodiff import Tensor
from .errors import DataValidationError, DegenerateVectorError, ShapeError
from .io import ClassGraph


@dataclass
class PrototypeParams:
    gcn_w1: Tensor  # dim_in x dim_hidden
    gcn_w2: Tensor  # dim_hidden x dim_out
    resid_w: Tensor  # dim_in x dim_out
    resid_b: Tensor  # 1 x dim_out

    def named_tensors(self) -> list[tuple[str, Tensor]]:
        return [
            ("prototype.gcn_w1", self.gcn_w1),
            ("prototype.gcn_w2", self.gcn_w2),
            ("prototype.resid_w", self.resid_w),
            ("prototype.resid_b", self.resid_b),
        ]


def init_prototype_params(
    dim_in: int,
    dim_out: int | None = None,
    hidden: int | None = None,
    rng: np.random.Generator | None = None,
) -> PrototypeParams:
    """Residual path starts at the identity so initial prototypes sit near
    the pooled text embeddings; the convolution starts small."""
    rng = np.random.default_rng(0) if rng is None else rng
    dim_out = dim_in if dim_out is None else dim_out
    hidden = dim_in if hidden is None else hidden
    scale1 = np.sqrt(2.0 / (dim_in + hidden))
    scale2 = np.sqrt(2.0 / (hidden + dim_out))
    if dim_in == dim_out:
        resid = np.eye(dim_in) + 1e-3 * rng.standard_normal((dim_in, dim_out))
    else:
        resid = np.sqrt(2.0 / (dim_in + dim_out)) * rng.standard_normal((dim_in, dim_out))
    return PrototypeParams(
        gcn_w1=Tensor(scale1 * rng.standard_normal((dim_in, hidden)), requires_grad=True),
        gcn_w2=Tensor(scale2 * rng.standard_normal((hidden, dim_out)), requires_grad=True),
        resid_w=Tensor(resid, requires_grad=True),
        resid_b=Tensor(np.zeros((1, dim_out)), requires_grad=True),
    )


def pool_synonyms(per_class_synonyms) -> np.ndarray:
    """Average each class's synonym embeddings and L2-normalize the result."""
    pooled = []
    for k, group in enumerate(per_class_synonyms):
        group = np.asarray(group, dtype=np.float64)
        if group.ndim != 2 or group.shape[0] == 0:
            raise DataValidationError(f"class {k} has no synonym embeddings")
        mean = group.mean(axis=0)
        norm = np.linalg.norm(mean)
        if norm == 0.0:
            raise DegenerateVectorError(f"class {k}: pooled synonyms have zero norm")
        pooled.append(mean / norm)
    return np.stack(pooled)


def normalize_adjacency(graph: ClassGraph) -> np.ndarray:
    """Symmetric normalization with self-loops: D^-1/2 (A + I) D^-1/2,
    with D the degree matrix of A + I. Not row-stochastic."""
    n = graph.node_count
    a = np.zeros((n, n))
    for u, v in graph.edges:
        a[u, v] = 1.0
        a[v, u] = 1.0
    a += np.eye(n)
    d_inv_sqrt = 1.0 / np.sqrt(a.sum(axis=1))
    return a * d_inv_sqrt[:, None] * d_inv_sqrt[None, :]


def forward_prototypes(
    node_embeddings,
    adjacency: np.ndarray,
    class_nodes,
    params: PrototypeParams,
    use_gcn: bool = True,
    use_residual: bool = True,
) -> Tensor:
    """Produce the unit-norm prototype matrix (one row per class).

    Full path: two graph-convolution layers (relu after the first only)
    plus a linear residual on the class's own pooled embedding. The
    toggles select the convolution-only and residual-only ablations.
    """
    e = ad.as_tensor(node_embeddings)
    if e.ndim != 2:
        raise ShapeError(f"node embeddings must be a matrix, got {e.shape}")
    if e.shape[0] != adjacency.shape[0]:
        raise ShapeError(
            f"{e.shape[0]} node rows vs {adjacency.shape[0]}-node adjacency"
        )
    if e.shape[1] != params.gcn_w1.shape[0]:
        raise ShapeError(
            f"node dim {e.shape[1]} vs gcn input dim {params.gcn_w1.shape[0]}"
        )
    class_idx = np.asarray(class_nodes, dtype=np.intp)
    a_hat = ad.as_tensor(adjacency)

    parts = []
    if use_gcn:
        h1 = ad.relu(ad.matmul(ad.matmul(a_hat, e), params.gcn_w1))
        h2 = ad.matmul(ad.matmul(a_hat, h1), params.gcn_w2)
        parts.append(ad.gather_rows(h2, class_idx))
    if use_residual:
        class_e = ad.gather_rows(e, class_idx)
        parts.append(ad.matmul(class_e, params.resid_w) + params.resid_b)
    if not parts:
        raise ShapeError("prototype branch needs the convolution, the residual, or both")
    out = parts[0] if len(parts) == 1 else parts[0] + parts[1]
    return ad.normalize_rows(out)
