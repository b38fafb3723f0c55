"""Seeded synthetic benchmark: a desk-scale stand-in for web-vs-curated
image corpora.

Construction
    * A balanced binary tree is built over the classes (leaves). Node
      embeddings diffuse down the tree - each child is its parent plus
      Gaussian drift, renormalized - so tree distance correlates with
      embedding similarity and the relation graph carries real signal.
    * Per-class "text" synonyms are the class mean plus small noise; class
      rows of the graph's node_init hold their pooled average, ancestor
      rows hold a noisy embedding of the ancestor itself.
    * Source images: class mean + Gaussian noise, seen classes only
      (unseen classes contribute zero source samples).
    * Target images: every class, with the mean first rotated by
      ``shift_angle`` radians inside a random rotation plane bundle - a
      controllable analogue of a domain-wide style shift - then noised.

Everything is drawn from a single seeded generator in a fixed order, so a
given seed always reproduces the same bundle bit for bit.
"""

from __future__ import annotations

import numpy as np

from .errors import ConfigError
from .io import ClassGraph, DatasetBundle

SYNONYMS_PER_CLASS = 3
SYNONYM_NOISE = 0.2  # per-coordinate sigma of the text-side noise
TREE_DRIFT = 0.7  # parent-to-child step length relative to the unit parent


def balanced_tree(num_leaves: int) -> tuple[list, dict, int, int]:
    """Balanced binary tree with leaves 0..num_leaves-1.

    Returns (edges, children, root, node_count); internal nodes take
    indices num_leaves.. in preorder of creation.
    """
    if num_leaves == 1:
        return [], {}, 0, 1
    edges: list = []
    children: dict = {}
    counter = [num_leaves]

    def build(lo: int, hi: int) -> int:
        if hi - lo == 1:
            return lo
        node = counter[0]
        counter[0] += 1
        mid = (lo + hi) // 2
        left = build(lo, mid)
        right = build(mid, hi)
        children[node] = (left, right)
        edges.append((min(node, left), max(node, left)))
        edges.append((min(node, right), max(node, right)))
        return node

    root = build(0, num_leaves)
    return edges, children, root, counter[0]


def _unit(v: np.ndarray) -> np.ndarray:
    return v / np.linalg.norm(v)


def _diffuse_means(children, root, node_count, dim, rng) -> np.ndarray:
    means = np.zeros((node_count, dim))
    means[root] = _unit(rng.standard_normal(dim))
    stack = [root]
    while stack:
        node = stack.pop()
        for child in children.get(node, ()):
            # unit drift direction keeps the step:parent ratio independent
            # of dim, so sibling separation is controlled by TREE_DRIFT alone
            drift = TREE_DRIFT * _unit(rng.standard_normal(dim))
            means[child] = _unit(means[node] + drift)
            stack.append(child)
    return means


def _rotation_matrix(dim: int, angle: float, rng) -> np.ndarray:
    """Rotation by ``angle`` in floor(dim/2) orthogonal planes of a random
    basis: every vector turns by exactly ``angle``."""
    basis = rng.standard_normal((dim, dim))
    q, r = np.linalg.qr(basis)
    q = q * np.sign(np.diag(r))  # fix QR sign convention
    block = np.eye(dim)
    c, s = np.cos(angle), np.sin(angle)
    for i in range(0, dim - 1, 2):
        block[i, i] = c
        block[i, i + 1] = -s
        block[i + 1, i] = s
        block[i + 1, i + 1] = c
    return q @ block @ q.T


def synth_generate(
    c_seen: int = 40,
    c_unseen: int = 10,
    dim: int = 64,
    per_class: int = 50,
    shift_angle: float = 0.3,
    noise_sigma: float = 0.15,
    seed: int = 0,
) -> tuple[DatasetBundle, ClassGraph, list[np.ndarray]]:
    if dim < 4:
        raise ConfigError(f"dim must be >= 4, got {dim}")
    if c_seen < 2:
        raise ConfigError(f"c_seen must be >= 2, got {c_seen}")
    if c_unseen < 1:
        raise ConfigError(f"c_unseen must be >= 1, got {c_unseen}")
    if per_class < 1:
        raise ConfigError(f"per_class must be >= 1, got {per_class}")

    rng = np.random.default_rng(seed)
    c = c_seen + c_unseen
    edges, children, root, node_count = balanced_tree(c)
    means = _diffuse_means(children, root, node_count, dim, rng)
    class_means = means[:c]

    unseen = np.sort(rng.permutation(c)[:c_unseen])
    seen_mask = np.ones(c, dtype=bool)
    seen_mask[unseen] = False

    synonyms = [
        class_means[k] + SYNONYM_NOISE * rng.standard_normal((SYNONYMS_PER_CLASS, dim))
        for k in range(c)
    ]
    pooled = np.stack([_unit(group.mean(axis=0)) for group in synonyms])

    node_init = np.zeros((node_count, dim))
    node_init[:c] = pooled
    for node in range(c, node_count):
        node_init[node] = _unit(
            means[node] + SYNONYM_NOISE * rng.standard_normal(dim)
        )

    rotation = None
    if shift_angle != 0.0:
        rotation = _rotation_matrix(dim, shift_angle, rng)
    target_means = class_means if rotation is None else class_means @ rotation.T

    seen_classes = np.flatnonzero(seen_mask)
    source_features = np.concatenate(
        [
            class_means[k] + noise_sigma * rng.standard_normal((per_class, dim))
            for k in seen_classes
        ]
    )
    source_labels = np.repeat(seen_classes, per_class)

    target_features = np.concatenate(
        [
            target_means[k] + noise_sigma * rng.standard_normal((per_class, dim))
            for k in range(c)
        ]
    )
    target_labels = np.repeat(np.arange(c), per_class)

    bundle = DatasetBundle(
        source_features=source_features,
        source_labels=source_labels,
        target_features=target_features,
        target_eval_labels=target_labels,
        seen_mask=seen_mask,
    )
    bundle.validate()
    graph = ClassGraph(
        node_count=node_count,
        edges=sorted(edges),
        class_nodes=np.arange(c, dtype=np.int64),
        node_init=node_init,
    )
    graph.validate()
    return bundle, graph, synonyms
