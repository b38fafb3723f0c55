"""File formats and loaders.

EMB1 binary matrix format
    magic "EMB1" | u32 rows | u32 dim | rows*dim float32, little-endian,
    row-major. A checkpoint container holds several EMB1 records back to
    back with a names sidecar (one name per line, i-th name <-> i-th
    record).

Text formats
    graph edges    first line "nodes N", then one "u v" pair per line
    class nodes    one node index per line (position k <-> class k)
    labels         one class index per line, aligned with embedding rows
    seen mask      one 0/1 per class
    synonym index  one "start count" row span per class

Embeddings are stored as 32-bit floats (matching upstream encoder output)
and widened to 64-bit on load so downstream numerics stay tight.
"""

from __future__ import annotations

import struct
import warnings
from dataclasses import dataclass
from pathlib import Path

import numpy as np

from .errors import (
    DataValidationError,
    FileFormatError,
    FileSizeError,
    GraphError,
)

MAGIC = b"EMB1"
_HEADER = struct.Struct("<II")


# -- EMB1 ---------------------------------------------------------------------


def save_embeddings(path, matrix: np.ndarray):
    """Write a 2-d matrix as one EMB1 record (values narrowed to float32)."""
    mat = np.ascontiguousarray(matrix, dtype="<f4")
    if mat.ndim != 2:
        raise FileFormatError(f"EMB1 stores matrices, got shape {mat.shape}")
    with open(path, "wb") as fh:
        fh.write(MAGIC)
        fh.write(_HEADER.pack(mat.shape[0], mat.shape[1]))
        fh.write(mat.tobytes())


def _parse_record(buf: bytes, offset: int, path) -> tuple[np.ndarray, int]:
    if len(buf) - offset < 12:
        raise FileSizeError(f"{path}: truncated EMB1 header")
    if buf[offset : offset + 4] != MAGIC:
        raise FileFormatError(f"{path}: bad magic {buf[offset:offset + 4]!r}")
    rows, dim = _HEADER.unpack_from(buf, offset + 4)
    payload = rows * dim * 4
    if len(buf) - offset - 12 < payload:
        raise FileSizeError(
            f"{path}: declares {rows}x{dim} values but payload is short"
        )
    flat = np.frombuffer(buf, dtype="<f4", count=rows * dim, offset=offset + 12)
    bad = ~np.isfinite(flat)
    if bad.any():
        row = int(np.flatnonzero(bad)[0]) // max(dim, 1)
        raise DataValidationError(f"{path}: non-finite value in row {row}")
    mat = flat.astype(np.float64).reshape(rows, dim)
    return mat, offset + 12 + payload


def load_embeddings(path) -> np.ndarray:
    """Load a single EMB1 record, widened to float64."""
    buf = Path(path).read_bytes()
    mat, end = _parse_record(buf, 0, path)
    if end != len(buf):
        raise FileSizeError(f"{path}: {len(buf) - end} trailing bytes after payload")
    return mat


def save_embedding_container(path, matrices):
    """Write several EMB1 records back to back (checkpoint container)."""
    with open(path, "wb") as fh:
        for mat in matrices:
            m = np.ascontiguousarray(mat, dtype="<f4")
            fh.write(MAGIC)
            fh.write(_HEADER.pack(m.shape[0], m.shape[1]))
            fh.write(m.tobytes())


def load_embedding_container(path) -> list[np.ndarray]:
    buf = Path(path).read_bytes()
    mats, offset = [], 0
    while offset < len(buf):
        mat, offset = _parse_record(buf, offset, path)
        mats.append(mat)
    return mats


# -- integer-per-line files -----------------------------------------------


def save_labels(path, labels):
    Path(path).write_text("".join(f"{int(v)}\n" for v in labels))


def load_labels(path, expected_rows: int | None = None) -> np.ndarray:
    lines = [ln for ln in Path(path).read_text().splitlines() if ln.strip()]
    try:
        labels = np.array([int(ln) for ln in lines], dtype=np.int64)
    except ValueError as err:
        raise FileFormatError(f"{path}: {err}") from None
    if expected_rows is not None and len(labels) != expected_rows:
        raise FileSizeError(
            f"{path}: {len(labels)} labels for {expected_rows} rows"
        )
    return labels


def save_mask(path, mask):
    Path(path).write_text("".join(f"{1 if v else 0}\n" for v in mask))


def load_mask(path, expected: int | None = None) -> np.ndarray:
    values = load_labels(path, expected)
    if not np.isin(values, (0, 1)).all():
        raise FileFormatError(f"{path}: mask entries must be 0 or 1")
    return values.astype(bool)


# -- relation graph ----------------------------------------------------------


@dataclass
class ClassGraph:
    """Semantic relation graph over class nodes and their ancestors."""

    node_count: int
    edges: list  # undirected (u, v) pairs, u < v, deduplicated
    class_nodes: np.ndarray  # position k holds the node index of class k
    node_init: np.ndarray  # per-node initial embeddings, node_count x dim

    @property
    def num_classes(self) -> int:
        return len(self.class_nodes)

    def validate(self):
        n = self.node_count
        for u, v in self.edges:
            if u == v:
                raise GraphError(f"self-loop on node {u}")
            if not (0 <= u < n and 0 <= v < n):
                raise GraphError(f"edge ({u}, {v}) out of range for {n} nodes")
        if len(set(self.class_nodes.tolist())) != len(self.class_nodes):
            raise GraphError("duplicate class node")
        for c in self.class_nodes:
            if not 0 <= c < n:
                raise GraphError(f"class node {c} out of range for {n} nodes")
        if self.node_init.shape[0] != n:
            raise GraphError(
                f"node_init has {self.node_init.shape[0]} rows for {n} nodes"
            )
        if not self._connected():
            warnings.warn("relation graph has disconnected components", stacklevel=3)

    def _connected(self) -> bool:
        if self.node_count <= 1:
            return True
        adj = [[] for _ in range(self.node_count)]
        for u, v in self.edges:
            adj[u].append(v)
            adj[v].append(u)
        seen = {0}
        frontier = [0]
        while frontier:
            node = frontier.pop()
            for nxt in adj[node]:
                if nxt not in seen:
                    seen.add(nxt)
                    frontier.append(nxt)
        return len(seen) == self.node_count


def save_graph(edge_path, class_nodes_path, node_init_path, graph: ClassGraph):
    lines = [f"nodes {graph.node_count}"]
    lines += [f"{u} {v}" for u, v in sorted(graph.edges)]
    Path(edge_path).write_text("".join(f"{ln}\n" for ln in lines))
    save_labels(class_nodes_path, graph.class_nodes)
    save_embeddings(node_init_path, graph.node_init)


def load_graph(edge_path, class_nodes_path, node_init_path) -> ClassGraph:
    lines = [ln.strip() for ln in Path(edge_path).read_text().splitlines()]
    lines = [ln for ln in lines if ln]
    if not lines or not lines[0].startswith("nodes "):
        raise FileFormatError(f"{edge_path}: first line must be 'nodes N'")
    try:
        node_count = int(lines[0].split()[1])
    except (IndexError, ValueError):
        raise FileFormatError(f"{edge_path}: malformed node count") from None
    edges = set()
    for ln in lines[1:]:
        parts = ln.split()
        if len(parts) != 2:
            raise FileFormatError(f"{edge_path}: malformed edge line {ln!r}")
        u, v = int(parts[0]), int(parts[1])
        edges.add((min(u, v), max(u, v)))
    graph = ClassGraph(
        node_count=node_count,
        edges=sorted(edges),
        class_nodes=load_labels(class_nodes_path),
        node_init=load_embeddings(node_init_path),
    )
    graph.validate()
    return graph


# -- per-class synonym embeddings ----------------------------------------------


def save_synonyms(emb_path, index_path, per_class):
    """Stack per-class synonym groups into one EMB1 plus a row-span index."""
    stacked = np.vstack(per_class)
    save_embeddings(emb_path, stacked)
    start = 0
    lines = []
    for group in per_class:
        lines.append(f"{start} {len(group)}")
        start += len(group)
    Path(index_path).write_text("".join(f"{ln}\n" for ln in lines))


def load_synonyms(emb_path, index_path) -> list[np.ndarray]:
    stacked = load_embeddings(emb_path)
    groups = []
    cursor = 0
    for ln in Path(index_path).read_text().splitlines():
        if not ln.strip():
            continue
        parts = ln.split()
        if len(parts) != 2:
            raise FileFormatError(f"{index_path}: malformed span {ln!r}")
        start, count = int(parts[0]), int(parts[1])
        if start != cursor or count < 0:
            raise FileFormatError(
                f"{index_path}: spans must tile the rows contiguously"
            )
        groups.append(stacked[start : start + count])
        cursor = start + count
    if cursor != stacked.shape[0]:
        raise FileSizeError(
            f"{index_path}: spans cover {cursor} of {stacked.shape[0]} rows"
        )
    return groups


# -- dataset bundle ------------------------------------------------------------


@dataclass
class DatasetBundle:
    """Source and target splits of one benchmark.

    ``target_eval_labels`` exist for inference-time scoring only; no
    training entry point accepts them.
    """

    source_features: np.ndarray
    source_labels: np.ndarray
    target_features: np.ndarray
    target_eval_labels: np.ndarray
    seen_mask: np.ndarray  # bool per class

    @property
    def num_classes(self) -> int:
        return len(self.seen_mask)

    def validate(self):
        c = self.num_classes
        if self.source_features.shape[0] != len(self.source_labels):
            raise DataValidationError("source features and labels disagree")
        if self.target_features.shape[0] != len(self.target_eval_labels):
            raise DataValidationError("target features and labels disagree")
        if self.seen_mask.sum() < 1 or (~self.seen_mask).sum() < 1:
            raise DataValidationError("need at least one seen and one unseen class")
        if len(self.source_labels) and not (
            (0 <= self.source_labels).all() & (self.source_labels < c).all()
        ):
            raise DataValidationError("source label out of range")
        if not ((0 <= self.target_eval_labels) & (self.target_eval_labels < c)).all():
            raise DataValidationError("target label out of range")
        if not self.seen_mask[self.source_labels].all():
            bad = int(self.source_labels[~self.seen_mask[self.source_labels]][0])
            raise DataValidationError(f"source sample labeled with unseen class {bad}")


_BENCH_FILES = {
    "source": "source.emb",
    "source_labels": "source_labels.txt",
    "target": "target.emb",
    "target_labels": "target_eval_labels.txt",
    "seen_mask": "seen_mask.txt",
    "edges": "graph_edges.txt",
    "class_nodes": "class_nodes.txt",
    "node_init": "node_init.emb",
    "synonyms": "synonyms.emb",
    "synonym_index": "synonyms.idx",
}


def save_benchmark(directory, bundle: DatasetBundle, graph: ClassGraph, synonyms):
    d = Path(directory)
    d.mkdir(parents=True, exist_ok=True)
    save_embeddings(d / _BENCH_FILES["source"], bundle.source_features)
    save_labels(d / _BENCH_FILES["source_labels"], bundle.source_labels)
    save_embeddings(d / _BENCH_FILES["target"], bundle.target_features)
    save_labels(d / _BENCH_FILES["target_labels"], bundle.target_eval_labels)
    save_mask(d / _BENCH_FILES["seen_mask"], bundle.seen_mask)
    save_graph(
        d / _BENCH_FILES["edges"],
        d / _BENCH_FILES["class_nodes"],
        d / _BENCH_FILES["node_init"],
        graph,
    )
    save_synonyms(d / _BENCH_FILES["synonyms"], d / _BENCH_FILES["synonym_index"], synonyms)


def load_benchmark(directory) -> tuple[DatasetBundle, ClassGraph, list[np.ndarray]]:
    d = Path(directory)
    source = load_embeddings(d / _BENCH_FILES["source"])
    target = load_embeddings(d / _BENCH_FILES["target"])
    graph = load_graph(
        d / _BENCH_FILES["edges"],
        d / _BENCH_FILES["class_nodes"],
        d / _BENCH_FILES["node_init"],
    )
    seen_mask = load_mask(d / _BENCH_FILES["seen_mask"], graph.num_classes)
    bundle = DatasetBundle(
        source_features=source,
        source_labels=load_labels(d / _BENCH_FILES["source_labels"], source.shape[0]),
        target_features=target,
        target_eval_labels=load_labels(d / _BENCH_FILES["target_labels"], target.shape[0]),
        seen_mask=seen_mask,
    )
    bundle.validate()
    synonyms = load_synonyms(d / _BENCH_FILES["synonyms"], d / _BENCH_FILES["synonym_index"])
    if len(synonyms) != graph.num_classes:
        raise DataValidationError(
            f"{len(synonyms)} synonym groups for {graph.num_classes} classes"
        )
    return bundle, graph, synonyms
