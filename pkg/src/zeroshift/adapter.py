"""Attention-based adapter from encoder features into the common space.

Each d-dimensional feature is reshaped into ``token_count`` tokens and run
through single-head scaled dot-product self-attention over its own tokens;
the attended tokens are added back onto the value stream and the result is
L2-normalized, so downstream dot products are cosine similarities. With
one token the attention weight is forced to 1 and the adapter degenerates
to a plain normalized linear map, which is kept as a documented config
point.

The same parameter object serves the image features and, for the
alignment-retention loss, the class text embeddings.
"""

from __future__ import annotations

from dataclasses import dataclass

import numpy as np

from . import autodiff as ad
from .autodiff import Tensor
from .errors import ConfigError, ShapeError


@dataclass
class AdapterParams:
    """Projection weights, applied as ``x @ w``; d must split into tokens."""

    w_q: Tensor
    w_k: Tensor
    w_v: Tensor
    token_count: int

    @property
    def dim(self) -> int:
        return self.w_v.shape[0]

    def named_tensors(self) -> list[tuple[str, Tensor]]:
        return [
            ("adapter.w_q", self.w_q),
            ("adapter.w_k", self.w_k),
            ("adapter.w_v", self.w_v),
        ]


def init_adapter(dim: int, token_count: int, rng: np.random.Generator) -> AdapterParams:
    """Near-identity start: the value path opens at the identity so the
    untrained adapter roughly reproduces raw-feature behavior."""
    if dim % token_count != 0:
        raise ConfigError(f"dim {dim} is not divisible by token_count {token_count}")
    w_v = np.eye(dim) + 1e-3 * rng.standard_normal((dim, dim))
    w_q = 0.02 * rng.standard_normal((dim, dim))
    w_k = 0.02 * rng.standard_normal((dim, dim))
    return AdapterParams(
        w_q=Tensor(w_q, requires_grad=True),
        w_k=Tensor(w_k, requires_grad=True),
        w_v=Tensor(w_v, requires_grad=True),
        token_count=token_count,
    )


def adapt_batch(features, params: AdapterParams, use_attention: bool = True) -> Tensor:
    """Map a batch of row features into the common space (rows unit-norm).

    Rows are adapted independently - attention runs over each sample's own
    tokens, never across the batch - so adapting a permuted batch permutes
    the output and nothing else.
    """
    f = ad.as_tensor(features)
    if f.ndim != 2:
        raise ShapeError(f"expected a batch of row features, got shape {f.shape}")
    n, d = f.shape
    t = params.token_count
    if d % t != 0:
        raise ConfigError(f"dim {d} is not divisible by token_count {t}")
    values = ad.matmul(f, params.w_v)
    if not use_attention:
        return ad.normalize_rows(values)
    dk = d // t
    q = ad.reshape(ad.matmul(f, params.w_q), (n, t, dk))
    k = ad.reshape(ad.matmul(f, params.w_k), (n, t, dk))
    v = ad.reshape(values, (n, t, dk))
    scores = ad.matmul(q, ad.swap_last2(k)) * (1.0 / np.sqrt(dk))
    attn = ad.softmax(scores, axis=-1)
    attended = ad.reshape(ad.matmul(attn, v), (n, d))
    return ad.normalize_rows(values + attended)


def adapt(feature, params: AdapterParams, use_attention: bool = True) -> Tensor:
    """Single-vector convenience wrapper around ``adapt_batch``."""
    f = ad.as_tensor(feature)
    if f.ndim != 1:
        raise ShapeError(f"expected a feature vector, got shape {f.shape}")
    out = adapt_batch(ad.reshape(f, (1, f.shape[0])), params, use_attention)
    return ad.reshape(out, (f.shape[0],))


def adapt_text(embeddings, params: AdapterParams, use_attention: bool = True) -> Tensor:
    """Run class text embeddings through the shared adapter (same parameter
    object as the image branch, not a copy)."""
    return adapt_batch(embeddings, params, use_attention)
