"""Two-phase training: labeled source warm-up, then alternating
source/target joint epochs.

Source-phase steps update both parameter partitions. Target-phase steps
update the adapter partition only; the prototype partition is excluded
from the optimizer entirely (no moment decay, no update), so its bytes
are identical before and after any run of target steps.

The trainer's inputs are the source split, the unlabeled target features,
and the per-class seen mask. Evaluation labels have no path in.
"""

from __future__ import annotations

from dataclasses import dataclass, field

import numpy as np

from . import autodiff as ad
from .autodiff import gradients
from .config import RunConfig
from .errors import DataValidationError, ShapeError, TrainingError
from .losses import (
    LossBreakdown,
    align_loss,
    ce_loss,
    compose,
    info_loss,
    ranking_loss,
    srs_loss_batch,
)
from .model import Model, seed_streams

ADAM_BETA1 = 0.9
ADAM_BETA2 = 0.999
ADAM_EPS = 1e-8


@dataclass
class AdamSlot:
    m: np.ndarray
    v: np.ndarray
    t: int = 0


@dataclass
class TrainState:
    model: Model
    moments: dict = field(default_factory=dict)
    epoch: int = 0
    step: int = 0
    log_lines: list = field(default_factory=list)
    source_rng: np.random.Generator = None
    target_rng: np.random.Generator = None


def init_state(model: Model) -> TrainState:
    streams = seed_streams(model.config.seed)
    return TrainState(
        model=model,
        source_rng=streams["source_shuffle"],
        target_rng=streams["target_shuffle"],
    )


def optimizer_step(named_params, grads, lr: float, moments: dict, step_index: int):
    """One Adam update over the given partition, in place.

    Only the partition passed in is touched; anything left out keeps both
    its bytes and its moments.
    """
    named_params = list(named_params)
    if len(named_params) != len(grads):
        raise ShapeError(f"{len(grads)} gradients for {len(named_params)} parameters")
    for (name, tensor), g in zip(named_params, grads):
        if g.shape != tensor.data.shape:
            raise ShapeError(
                f"gradient shape {g.shape} for {name} with shape {tensor.data.shape}"
            )
        if not np.isfinite(g).all():
            raise TrainingError(f"non-finite gradient for {name} at step {step_index}")
        slot = moments.get(name)
        if slot is None:
            slot = moments[name] = AdamSlot(
                np.zeros(tensor.data.shape), np.zeros(tensor.data.shape)
            )
        slot.t += 1
        slot.m = ADAM_BETA1 * slot.m + (1.0 - ADAM_BETA1) * g
        slot.v = ADAM_BETA2 * slot.v + (1.0 - ADAM_BETA2) * g * g
        m_hat = slot.m / (1.0 - ADAM_BETA1 ** slot.t)
        v_hat = slot.v / (1.0 - ADAM_BETA2 ** slot.t)
        tensor.data = tensor.data - lr * m_hat / (np.sqrt(v_hat) + ADAM_EPS)


def _seen_remap(seen_mask) -> tuple[np.ndarray, np.ndarray]:
    seen_classes = np.flatnonzero(np.asarray(seen_mask, dtype=bool))
    remap = np.full(len(seen_mask), -1, dtype=np.intp)
    remap[seen_classes] = np.arange(len(seen_classes))
    return seen_classes, remap


def source_step(state: TrainState, features, labels, seen_mask) -> LossBreakdown:
    """One labeled source batch: classification and ranking against the
    seen-class prototypes, plus the optional structure and alignment terms
    over the full class set. Updates both partitions."""
    model, cfg = state.model, state.model.config
    labels = np.asarray(labels, dtype=np.intp)
    seen_classes, remap = _seen_remap(seen_mask)
    remapped = remap[labels]
    if (remapped < 0).any():
        bad = int(labels[remapped < 0][0])
        raise DataValidationError(f"source sample labeled with unseen class {bad}")

    protos = model.prototypes()
    v = model.adapt_images(features)
    seen_protos = ad.gather_rows(protos, seen_classes)
    ce = ce_loss(v, seen_protos, remapped, cfg.temperature)
    ranking = ranking_loss(v, seen_protos, remapped, cfg.margin)
    srs = srs_loss_batch(v, protos, labels) if cfg.srs_on_source else None
    align = (
        align_loss(model.adapt_class_text(), protos, cfg.temperature)
        if cfg.align_on_source
        else None
    )
    breakdown = compose(
        "source",
        cfg.beta,
        cfg.gamma,
        ce=ce,
        ranking=ranking,
        srs=srs,
        align=align,
        use_srs=cfg.srs_on_source,
        use_align=cfg.align_on_source,
    )
    adapter_named = model.adapter.named_tensors()
    proto_named = model.prototype.named_tensors()
    grads = gradients(breakdown.total, [t for _, t in adapter_named + proto_named])
    optimizer_step(adapter_named, grads[: len(adapter_named)], cfg.lr_adapter,
                   state.moments, state.step)
    optimizer_step(proto_named, grads[len(adapter_named):], cfg.lr_prototype,
                   state.moments, state.step)
    return breakdown


def target_step(state: TrainState, features) -> LossBreakdown:
    """One unlabeled target batch: entropy objective plus the optional
    structure term against fresh pseudo-labels and the alignment term.
    Updates the adapter partition only."""
    model, cfg = state.model, state.model.config
    protos = model.prototypes()
    v = model.adapt_images(features)
    info = info_loss(v, protos, cfg.temperature)
    srs = None
    if cfg.srs_on_target:
        # pseudo-labels from the current parameters, recomputed every step
        pseudo = np.argmax(v.data @ protos.data.T, axis=1)
        srs = srs_loss_batch(v, protos, pseudo)
    align = (
        align_loss(model.adapt_class_text(), protos, cfg.temperature)
        if cfg.align_on_target
        else None
    )
    breakdown = compose(
        "target",
        cfg.beta,
        cfg.gamma,
        info=info,
        srs=srs,
        align=align,
        use_srs=cfg.srs_on_target,
        use_align=cfg.align_on_target,
    )
    adapter_named = model.adapter.named_tensors()
    grads = gradients(breakdown.total, [t for _, t in adapter_named])
    optimizer_step(adapter_named, grads, cfg.lr_adapter, state.moments, state.step)
    return breakdown


def _batches(count: int, batch_size: int, rng: np.random.Generator):
    order = rng.permutation(count)
    for start in range(0, count, batch_size):
        yield order[start : start + batch_size]


def _log(state: TrainState, breakdown: LossBreakdown):
    state.log_lines.append(breakdown.log_line(state.step))
    state.step += 1


def _source_pass(state: TrainState, source_features, source_labels, seen_mask):
    cfg = state.model.config
    for batch in _batches(source_features.shape[0], cfg.batch_size, state.source_rng):
        _log(state, source_step(state, source_features[batch], source_labels[batch],
                                seen_mask))


def _target_pass(state: TrainState, target_features):
    cfg = state.model.config
    for batch in _batches(target_features.shape[0], cfg.batch_size, state.target_rng):
        _log(state, target_step(state, target_features[batch]))


def warmup(state: TrainState, source_features, source_labels, seen_mask,
           config: RunConfig | None = None) -> TrainState:
    """Source-only epochs that settle both branches before the target
    domain enters."""
    cfg = state.model.config if config is None else config
    source_features = np.asarray(source_features, dtype=np.float64)
    source_labels = np.asarray(source_labels, dtype=np.intp)
    if source_features.shape[0] == 0:
        raise TrainingError("empty source set")
    for _ in range(cfg.warmup_epochs):
        _source_pass(state, source_features, source_labels, seen_mask)
        state.epoch += 1
    return state


def joint_train(state: TrainState, source_features, source_labels, seen_mask,
                target_features, config: RunConfig | None = None,
                allow_empty_target: bool = False) -> TrainState:
    """Alternating epochs: one full source pass, then one full target pass.

    An empty target set is an error unless explicitly allowed, in which
    case training degrades to source-only epochs.
    """
    cfg = state.model.config if config is None else config
    source_features = np.asarray(source_features, dtype=np.float64)
    source_labels = np.asarray(source_labels, dtype=np.intp)
    target_features = np.asarray(target_features, dtype=np.float64)
    if source_features.shape[0] == 0:
        raise TrainingError("empty source set")
    if target_features.shape[0] == 0 and not allow_empty_target:
        raise TrainingError("empty target set")
    for _ in range(cfg.joint_epochs):
        _source_pass(state, source_features, source_labels, seen_mask)
        if target_features.shape[0]:
            _target_pass(state, target_features)
        state.epoch += 1
    return state


def train_run(model: Model, source_features, source_labels, seen_mask,
              target_features, allow_empty_target: bool = False) -> TrainState:
    """Full schedule: warm-up epochs, then joint epochs."""
    state = init_state(model)
    warmup(state, source_features, source_labels, seen_mask)
    joint_train(state, source_features, source_labels, seen_mask, target_features,
                allow_empty_target=allow_empty_target)
    return state
