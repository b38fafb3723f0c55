"""Trainer tests: the Adam update against its closed form, the per-phase
parameter partitions, schedule bookkeeping, and determinism."""

import inspect

import numpy as np
import pytest

from zeroshift.autodiff import Tensor
from zeroshift.config import RunConfig
from zeroshift.errors import DataValidationError, ShapeError, TrainingError
from zeroshift.model import build_model, seed_streams
from zeroshift.synth import synth_generate
from zeroshift.trainer import (
    ADAM_EPS,
    init_state,
    joint_train,
    optimizer_step,
    source_step,
    target_step,
    train_run,
    warmup,
)


def small_setup(seed=0, **overrides):
    bundle, graph, synonyms = synth_generate(
        c_seen=4, c_unseen=2, dim=8, per_class=6, seed=seed
    )
    fields = dict(seed=seed, token_count=4, warmup_epochs=1, joint_epochs=1,
                  batch_size=8)
    fields.update(overrides)
    model = build_model(graph, synonyms, RunConfig(**fields))
    return bundle, model


def param_bytes(named):
    return [(name, t.data.tobytes()) for name, t in named]


# ---------------------------------------------------------------- optimizer


def test_adam_first_step_matches_closed_form():
    rng = np.random.default_rng(0)
    w = Tensor(rng.standard_normal((3, 4)), requires_grad=True)
    g = rng.standard_normal((3, 4))
    lr = 0.05
    before = w.data.copy()
    moments = {}
    optimizer_step([("w", w)], [g], lr, moments, step_index=0)
    # with zeroed moments the bias-corrected ratio is g / (|g| + eps)
    expected = before - lr * g / (np.abs(g) + ADAM_EPS)
    assert np.allclose(w.data, expected, atol=1e-12)
    assert moments["w"].t == 1


def test_adam_zero_gradient_leaves_parameter_unchanged():
    w = Tensor(np.ones((2, 2)), requires_grad=True)
    before = w.data.tobytes()
    moments = {}
    optimizer_step([("w", w)], [np.zeros((2, 2))], 0.1, moments, step_index=0)
    assert w.data.tobytes() == before
    assert moments["w"].t == 1  # the slot still advances


def test_adam_zero_lr_is_bitwise_noop():
    rng = np.random.default_rng(1)
    w = Tensor(rng.standard_normal((4, 4)), requires_grad=True)
    before = w.data.tobytes()
    optimizer_step([("w", w)], [rng.standard_normal((4, 4))], 0.0, {}, 0)
    assert w.data.tobytes() == before


def test_adam_second_step_moments():
    w = Tensor(np.zeros(3), requires_grad=True)
    g1, g2 = np.array([1.0, -2.0, 0.5]), np.array([0.5, 1.0, -1.0])
    moments = {}
    optimizer_step([("w", w)], [g1], 0.01, moments, 0)
    optimizer_step([("w", w)], [g2], 0.01, moments, 1)
    slot = moments["w"]
    assert slot.t == 2
    assert np.allclose(slot.m, 0.9 * (0.1 * g1) + 0.1 * g2)
    assert np.allclose(slot.v, 0.999 * (0.001 * g1 * g1) + 0.001 * g2 * g2)


def test_adam_shape_and_count_mismatch():
    w = Tensor(np.zeros((2, 2)), requires_grad=True)
    with pytest.raises(ShapeError):
        optimizer_step([("w", w)], [np.zeros(3)], 0.1, {}, 0)
    with pytest.raises(ShapeError):
        optimizer_step([("w", w)], [np.zeros((2, 2)), np.zeros(1)], 0.1, {}, 0)


def test_non_finite_gradient_aborts_with_context():
    w = Tensor(np.zeros((2, 2)), requires_grad=True)
    bad = np.full((2, 2), np.nan)
    with pytest.raises(TrainingError, match="non-finite gradient for w at step 7"):
        optimizer_step([("w", w)], [bad], 0.1, {}, 7)


# ---------------------------------------------------------------- partitions


def test_target_steps_never_touch_prototype_partition():
    bundle, model = small_setup()
    state = init_state(model)
    proto_before = param_bytes(model.prototype.named_tensors())
    adapter_before = param_bytes(model.adapter.named_tensors())
    for _ in range(10):
        target_step(state, bundle.target_features[:8])
        state.step += 1
    assert param_bytes(model.prototype.named_tensors()) == proto_before
    assert param_bytes(model.adapter.named_tensors()) != adapter_before
    # no moment slots were ever created for the excluded partition
    assert all(not k.startswith("prototype.") for k in state.moments)


def test_source_step_updates_both_partitions():
    bundle, model = small_setup()
    state = init_state(model)
    proto_before = param_bytes(model.prototype.named_tensors())
    adapter_before = param_bytes(model.adapter.named_tensors())
    source_step(state, bundle.source_features[:8], bundle.source_labels[:8],
                bundle.seen_mask)
    assert param_bytes(model.prototype.named_tensors()) != proto_before
    assert param_bytes(model.adapter.named_tensors()) != adapter_before


def test_source_step_rejects_unseen_label():
    bundle, model = small_setup()
    state = init_state(model)
    unseen = int(np.flatnonzero(~bundle.seen_mask)[0])
    labels = bundle.source_labels[:4].copy()
    labels[2] = unseen
    with pytest.raises(DataValidationError, match=f"unseen class {unseen}"):
        source_step(state, bundle.source_features[:4], labels, bundle.seen_mask)


# ------------------------------------------------------------------ schedule


def test_warmup_zero_epochs_is_noop():
    bundle, model = small_setup(warmup_epochs=0)
    state = init_state(model)
    before = param_bytes(model.named_tensors())
    warmup(state, bundle.source_features, bundle.source_labels, bundle.seen_mask)
    assert state.epoch == 0 and state.step == 0 and state.log_lines == []
    assert param_bytes(model.named_tensors()) == before


def test_empty_source_raises():
    bundle, model = small_setup()
    state = init_state(model)
    empty = np.zeros((0, 8))
    with pytest.raises(TrainingError, match="empty source"):
        warmup(state, empty, np.zeros(0, dtype=int), bundle.seen_mask)
    with pytest.raises(TrainingError, match="empty source"):
        joint_train(state, empty, np.zeros(0, dtype=int), bundle.seen_mask,
                    bundle.target_features)


def test_empty_target_raises_unless_allowed():
    bundle, model = small_setup()
    state = init_state(model)
    empty = np.zeros((0, 8))
    with pytest.raises(TrainingError, match="empty target"):
        joint_train(state, bundle.source_features, bundle.source_labels,
                    bundle.seen_mask, empty)
    joint_train(state, bundle.source_features, bundle.source_labels,
                bundle.seen_mask, empty, allow_empty_target=True)
    assert all(" phase=source " in line for line in state.log_lines)


def test_full_run_schedule_counts():
    bundle, model = small_setup(warmup_epochs=2, joint_epochs=3, batch_size=8)
    state = train_run(model, bundle.source_features, bundle.source_labels,
                      bundle.seen_mask, bundle.target_features)
    assert state.epoch == 5
    source_batches = -(-bundle.source_features.shape[0] // 8)
    target_batches = -(-bundle.target_features.shape[0] // 8)
    expected = 5 * source_batches + 3 * target_batches
    assert state.step == expected
    assert len(state.log_lines) == expected
    phases = [line.split()[1] for line in state.log_lines]
    assert phases[: 2 * source_batches] == ["phase=source"] * (2 * source_batches)
    assert "phase=target" in phases


def test_log_lines_use_key_value_format():
    bundle, model = small_setup()
    state = train_run(model, bundle.source_features, bundle.source_labels,
                      bundle.seen_mask, bundle.target_features)
    keys = ("step", "phase", "ce", "ranking", "info", "srs", "align", "total")
    for line in state.log_lines:
        parts = line.split()
        assert len(parts) == len(keys)
        assert [p.split("=")[0] for p in parts] == list(keys)
    first = dict(p.split("=") for p in state.log_lines[0].split())
    assert first["step"] == "0" and first["phase"] == "source"
    assert first["info"] == "0.0"  # phase-inactive terms log exactly zero
    target_lines = [l for l in state.log_lines if " phase=target " in l]
    assert all(dict(p.split("=") for p in l.split())["ce"] == "0.0"
               for l in target_lines)


# --------------------------------------------------------------- determinism


def test_same_seed_reproduces_logs_and_parameters():
    runs = []
    for _ in range(2):
        bundle, model = small_setup(seed=3)
        state = train_run(model, bundle.source_features, bundle.source_labels,
                          bundle.seen_mask, bundle.target_features)
        runs.append((state.log_lines, param_bytes(model.named_tensors())))
    assert runs[0][0] == runs[1][0]
    assert runs[0][1] == runs[1][1]


def test_different_seed_changes_run():
    outs = []
    for seed in (0, 1):
        bundle, model = small_setup(seed=seed)
        state = train_run(model, bundle.source_features, bundle.source_labels,
                          bundle.seen_mask, bundle.target_features)
        outs.append(state.log_lines)
    assert outs[0] != outs[1]


def test_seed_streams_are_independent():
    streams = seed_streams(0)
    assert set(streams) == {"adapter_init", "prototype_init", "source_shuffle",
                            "target_shuffle"}
    draws = {n: s.standard_normal(4) for n, s in streams.items()}
    names = list(draws)
    for i in range(len(names)):
        for j in range(i + 1, len(names)):
            assert not np.allclose(draws[names[i]], draws[names[j]])
    again = seed_streams(0)
    assert np.array_equal(draws["adapter_init"], again["adapter_init"].standard_normal(4))


def test_loss_toggles_change_target_phase_logs():
    base_lines, off_lines = [], []
    for flags, dest in ((dict(), base_lines),
                        (dict(srs_on_target=False, align_on_target=False), off_lines)):
        bundle, model = small_setup(warmup_epochs=0, **flags)
        state = train_run(model, bundle.source_features, bundle.source_labels,
                          bundle.seen_mask, bundle.target_features)
        dest.extend(l for l in state.log_lines if " phase=target " in l)
    on_first = dict(p.split("=") for p in base_lines[0].split())
    off_first = dict(p.split("=") for p in off_lines[0].split())
    assert float(on_first["srs"]) != 0.0
    assert off_first["srs"] == "0.0" and off_first["align"] == "0.0"
    assert off_first["total"] == off_first["info"]


# ----------------------------------------------------------------- API audit


def test_no_training_entry_point_accepts_eval_labels():
    for fn in (warmup, joint_train, train_run, source_step, target_step):
        params = set(inspect.signature(fn).parameters)
        assert "target_eval_labels" not in params
        assert "bundle" not in params
        assert "eval_labels" not in params
