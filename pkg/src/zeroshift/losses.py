"""Training objectives over unit-norm embeddings.

Every loss here consumes rows that are already unit-norm (the adapter and
the prototype branch both normalize their outputs), so a plain dot product
between a feature row and a prototype row is their cosine similarity.
Batch reductions are means, never sums, so loss magnitudes stay comparable
across batch sizes and the mixing weights transfer between configurations.

The suite:

* ``ce_loss``          softmax cross-entropy on scaled similarities
* ``ranking_loss``     pairwise hinge pushing the true class above others
* ``info_loss``        confident-per-sample, diverse-across-batch entropy
* ``srs_loss``         matches each sample's similarity profile against its
                       class prototype's own profile (soft relational labels)
* ``align_loss``       adapted class text must classify as its own class
* ``compose``          phase-specific weighted total with on/off switches
"""

from __future__ import annotations

from dataclasses import dataclass

import numpy as np

from . import autodiff as ad
from .autodiff import Tensor
from .errors import DataValidationError, ShapeError, TrainingError


def _as_matrix(x, what: str) -> Tensor:
    t = ad.as_tensor(x)
    if t.ndim != 2:
        raise ShapeError(f"{what} must be a matrix, got shape {t.shape}")
    return t


def _check_labels(labels, class_count: int) -> np.ndarray:
    idx = np.asarray(labels, dtype=np.intp)
    if idx.ndim != 1:
        raise ShapeError(f"labels must be a vector, got shape {idx.shape}")
    bad = (idx < 0) | (idx >= class_count)
    if bad.any():
        raise DataValidationError(
            f"label {int(idx[bad.argmax()])} out of range for {class_count} classes"
        )
    return idx


def scaled_logits(features, prototypes, temperature: float) -> Tensor:
    """Similarity logits: temperature * features @ prototypes.T."""
    f = _as_matrix(features, "features")
    p = _as_matrix(prototypes, "prototypes")
    if f.shape[1] != p.shape[1]:
        raise ShapeError(f"feature dim {f.shape[1]} vs prototype dim {p.shape[1]}")
    return ad.matmul(f, ad.transpose(p)) * float(temperature)


def ce_loss(v_batch, prototypes, labels, temperature: float = 30.0) -> Tensor:
    """Mean negative log-probability of each sample's labeled class."""
    logits = scaled_logits(v_batch, prototypes, temperature)
    idx = _check_labels(labels, logits.shape[1])
    if idx.shape[0] != logits.shape[0]:
        raise ShapeError(f"{idx.shape[0]} labels for {logits.shape[0]} samples")
    return -ad.tmean(ad.pick(ad.log_softmax(logits), idx))


def ranking_loss(v_batch, prototypes, labels, margin: float = 0.1) -> Tensor:
    """Hinge on raw similarities: every wrong class must trail the labeled
    class by at least ``margin``. Mean over all (sample, wrong class) pairs."""
    v = _as_matrix(v_batch, "features")
    p = _as_matrix(prototypes, "prototypes")
    n, c = v.shape[0], p.shape[0]
    idx = _check_labels(labels, c)
    if idx.shape[0] != n:
        raise ShapeError(f"{idx.shape[0]} labels for {n} samples")
    if c < 2:
        return Tensor(0.0)
    sims = ad.matmul(v, ad.transpose(p))
    pos = ad.reshape(ad.pick(sims, idx), (n, 1))
    hinge = ad.relu(float(margin) - pos + sims)
    keep = np.ones((n, c))
    keep[np.arange(n), idx] = 0.0
    return ad.tsum(hinge * Tensor(keep)) * (1.0 / (n * (c - 1)))


def info_loss(v_batch, prototypes, temperature: float = 30.0) -> Tensor:
    """Per-sample entropy minus batch-marginal entropy.

    Low values mean each sample commits to one class while the batch as a
    whole spreads over many classes; the range is [-ln c, ln c]. Useful on
    unlabeled batches where no per-sample target exists.
    """
    logits = scaled_logits(v_batch, prototypes, temperature)
    log_q = ad.log_softmax(logits)
    q = ad.exp(log_q)
    mean_entropy = -ad.tmean(ad.tsum(q * log_q, axis=-1))
    marginal = ad.tmean(q, axis=0)
    marginal_entropy = -ad.tsum(ad.xlogx(marginal))
    return mean_entropy - marginal_entropy


def srs_loss_batch(v_batch, prototypes, pos_indices) -> Tensor:
    """Mean squared gap between each sample's similarity profile over all
    prototypes and its positive prototype's own profile.

    Computed as ((v - p_pos) @ P.T)^2 summed per sample: column j holds
    R(v, p_j) - R(p_pos, p_j), and the positive column reduces to
    -(1 - R(v, p_pos)) for unit rows. The factored form makes a sample
    sitting exactly on its prototype score exactly zero.
    """
    v = _as_matrix(v_batch, "features")
    p = _as_matrix(prototypes, "prototypes")
    idx = _check_labels(pos_indices, p.shape[0])
    if idx.shape[0] != v.shape[0]:
        raise ShapeError(f"{idx.shape[0]} positives for {v.shape[0]} samples")
    gap = ad.matmul(v - ad.gather_rows(p, idx), ad.transpose(p))
    return ad.tmean(ad.tsum(gap * gap, axis=-1))


def srs_loss(v, prototypes, pos_index: int) -> Tensor:
    """Single-sample form of ``srs_loss_batch``."""
    t = ad.as_tensor(v)
    if t.ndim != 1:
        raise ShapeError(f"expected a feature vector, got shape {t.shape}")
    return srs_loss_batch(ad.reshape(t, (1, t.shape[0])), prototypes, [pos_index])


def align_loss(adapted_text, prototypes, temperature: float = 30.0) -> Tensor:
    """Cross-entropy anchoring each adapted class text row to its own class."""
    g = _as_matrix(adapted_text, "adapted text")
    p = _as_matrix(prototypes, "prototypes")
    if g.shape[0] != p.shape[0]:
        raise ShapeError(
            f"{g.shape[0]} adapted text rows for {p.shape[0]} prototypes"
        )
    return ce_loss(g, p, np.arange(g.shape[0]), temperature)


@dataclass
class LossBreakdown:
    """One training step's loss components (floats, for logging) and the
    differentiable total. Disabled components are recorded as 0.0 and add
    nothing to the total."""

    phase: str
    ce: float
    ranking: float
    info: float
    srs: float
    align: float
    total: Tensor

    def total_value(self) -> float:
        return float(self.total.data)

    def log_line(self, step: int) -> str:
        return (
            f"step={step} phase={self.phase} ce={self.ce!r} "
            f"ranking={self.ranking!r} info={self.info!r} srs={self.srs!r} "
            f"align={self.align!r} total={self.total_value()!r}"
        )


def _value(part: Tensor | None) -> float:
    return 0.0 if part is None else float(part.data)


def compose(
    phase: str,
    beta: float,
    gamma: float,
    ce: Tensor | None = None,
    ranking: Tensor | None = None,
    info: Tensor | None = None,
    srs: Tensor | None = None,
    align: Tensor | None = None,
    use_srs: bool = True,
    use_align: bool = True,
) -> LossBreakdown:
    """Weighted per-phase total.

    source: ce + ranking + beta * align + gamma * srs
    target: info + beta * align + gamma * srs

    A part whose switch is off (or that was never computed) contributes
    exactly zero. The composition is linear in each part, so doubling a
    weight exactly doubles that part's contribution.
    """
    if phase == "source":
        if ce is None or ranking is None:
            raise TrainingError("source phase requires ce and ranking parts")
        total = ce + ranking
    elif phase == "target":
        if info is None:
            raise TrainingError("target phase requires the info part")
        total = info
    else:
        raise TrainingError(f"unknown phase {phase!r}")
    srs_on = use_srs and srs is not None
    align_on = use_align and align is not None
    if align_on:
        total = total + float(beta) * align
    if srs_on:
        total = total + float(gamma) * srs
    return LossBreakdown(
        phase=phase,
        ce=_value(ce) if phase == "source" else 0.0,
        ranking=_value(ranking) if phase == "source" else 0.0,
        info=_value(info) if phase == "target" else 0.0,
        srs=_value(srs) if srs_on else 0.0,
        align=_value(align) if align_on else 0.0,
        total=total,
    )
