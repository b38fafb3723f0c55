"""Inference and scoring: nearest-prototype classification, seen/unseen
accuracy with their harmonic mean, the no-training baseline, and feature
export with an optional 2-d projection.

Scoring runs over all classes at once; a sample counts toward the seen or
unseen group according to its true class. Accuracies are per-sample within
each group, in percent.
"""

from __future__ import annotations

from dataclasses import dataclass
from pathlib import Path

import numpy as np

from .errors import DataValidationError, DegenerateVectorError, ShapeError
from .io import save_embeddings


def h_score(seen_acc: float, unseen_acc: float) -> float:
    """Harmonic mean of the two group accuracies; 0 when both are 0."""
    total = seen_acc + unseen_acc
    if total <= 0:
        return 0.0
    return 2.0 * seen_acc * unseen_acc / total


@dataclass
class EvalReport:
    seen_acc: float
    unseen_acc: float
    h_score: float
    per_class_acc: np.ndarray  # percent per class; 0 for classes with no samples
    confusion: np.ndarray  # [true, predicted] counts

    def as_text(self) -> str:
        lines = [
            f"seen_acc={self.seen_acc!r}",
            f"unseen_acc={self.unseen_acc!r}",
            f"h_score={self.h_score!r}",
            "per_class_acc=" + ",".join(repr(a) for a in self.per_class_acc.tolist()),
        ]
        return "".join(line + "\n" for line in lines)


def _unit_rows(matrix: np.ndarray, what: str) -> np.ndarray:
    norms = np.linalg.norm(matrix, axis=-1, keepdims=True)
    if not (norms > 0).all():
        raise DegenerateVectorError(f"zero-norm row in {what}")
    return matrix / norms


def classify(v, prototypes) -> int:
    """Nearest prototype by cosine; ties go to the lowest class index."""
    v = np.asarray(v, dtype=np.float64)
    if v.ndim != 1:
        raise ShapeError(f"expected a feature vector, got shape {v.shape}")
    return int(classify_batch(v[None, :], prototypes)[0])


def classify_batch(features, prototypes) -> np.ndarray:
    f = _unit_rows(np.asarray(features, dtype=np.float64), "features")
    p = _unit_rows(np.asarray(prototypes, dtype=np.float64), "prototypes")
    if f.shape[1] != p.shape[1]:
        raise ShapeError(f"feature dim {f.shape[1]} vs prototype dim {p.shape[1]}")
    return np.argmax(f @ p.T, axis=1)


def score_predictions(predicted, true_labels, seen_mask) -> EvalReport:
    predicted = np.asarray(predicted, dtype=np.intp)
    true_labels = np.asarray(true_labels, dtype=np.intp)
    seen_mask = np.asarray(seen_mask, dtype=bool)
    c = len(seen_mask)
    if ((true_labels < 0) | (true_labels >= c)).any():
        raise DataValidationError(f"evaluation label out of range for {c} classes")
    if predicted.shape != true_labels.shape:
        raise ShapeError(f"{predicted.shape} predictions for {true_labels.shape} labels")

    confusion = np.zeros((c, c), dtype=np.int64)
    np.add.at(confusion, (true_labels, predicted), 1)
    totals = confusion.sum(axis=1)
    hits = np.diag(confusion)
    per_class = np.where(totals > 0, 100.0 * hits / np.maximum(totals, 1), 0.0)

    def group_acc(mask):
        member = mask[true_labels]
        if not member.any():
            return 0.0
        return 100.0 * float((predicted[member] == true_labels[member]).mean())

    seen = group_acc(seen_mask)
    unseen = group_acc(~seen_mask)
    return EvalReport(
        seen_acc=seen,
        unseen_acc=unseen,
        h_score=h_score(seen, unseen),
        per_class_acc=per_class,
        confusion=confusion,
    )


def evaluate(target_features, target_eval_labels, seen_mask, model) -> EvalReport:
    """Adapt the target features, classify against the model's prototypes,
    and score per group."""
    protos = model.prototypes().data
    adapted = model.adapt_images(np.asarray(target_features, dtype=np.float64)).data
    return score_predictions(
        classify_batch(adapted, protos), target_eval_labels, seen_mask
    )


def zero_shot_baseline(target_features, target_eval_labels, seen_mask,
                       class_embeddings) -> EvalReport:
    """Classify raw features straight against the normalized pooled class
    text embeddings: no adapter, no graph, nothing trained."""
    anchors = _unit_rows(np.asarray(class_embeddings, dtype=np.float64), "class embeddings")
    return score_predictions(
        classify_batch(target_features, anchors), target_eval_labels, seen_mask
    )


def pca_top2(matrix: np.ndarray) -> tuple[np.ndarray, np.ndarray]:
    """Project rows onto their top-2 principal directions.

    Returns (n x 2 projection, 2 x d components). Component signs are fixed
    so each one's largest-magnitude entry is positive.
    """
    x = np.asarray(matrix, dtype=np.float64)
    if x.ndim != 2 or x.shape[0] < 2 or x.shape[1] < 2:
        raise ShapeError(f"need at least a 2x2 matrix, got {x.shape}")
    centered = x - x.mean(axis=0)
    _, _, vt = np.linalg.svd(centered, full_matrices=False)
    components = vt[:2]
    for i in range(2):
        lead = np.argmax(np.abs(components[i]))
        if components[i, lead] < 0:
            components[i] = -components[i]
    return centered @ components.T, components


def export_features(model, features, out_dir, project_to_2d: bool = False,
                    labels=None) -> list[str]:
    """Write adapted features as an embedding file; optionally also a text
    table of the top-2 principal components with a label column (label -1
    when none are supplied). Returns the paths written."""
    d = Path(out_dir)
    d.mkdir(parents=True, exist_ok=True)
    adapted = model.adapt_images(np.asarray(features, dtype=np.float64)).data
    emb_path = d / "adapted.emb"
    save_embeddings(emb_path, adapted)
    written = [str(emb_path)]
    if project_to_2d:
        projected, _ = pca_top2(adapted)
        if labels is None:
            labels = np.full(projected.shape[0], -1, dtype=np.int64)
        labels = np.asarray(labels, dtype=np.int64)
        if labels.shape[0] != projected.shape[0]:
            raise ShapeError(f"{labels.shape[0]} labels for {projected.shape[0]} rows")
        txt_path = d / "projection.txt"
        with open(txt_path, "w") as fh:
            for (a, b), lab in zip(projected, labels):
                fh.write(f"{float(a)!r} {float(b)!r} {int(lab)}\n")
        written.append(str(txt_path))
    return written
