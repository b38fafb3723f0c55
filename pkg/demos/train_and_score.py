"""Walk through the whole pipeline in memory: make a benchmark, look at the
untrained baseline, train, and score again."""

import numpy as np

from zeroshift.config import RunConfig
from zeroshift.evaluation import evaluate, zero_shot_baseline
from zeroshift.model import build_model
from zeroshift.prototypes import pool_synonyms
from zeroshift.synth import synth_generate
from zeroshift.trainer import train_run

# a mid-sized benchmark: 12 seen classes, 3 held out, everything seeded
bundle, graph, synonyms = synth_generate(
    c_seen=12, c_unseen=3, dim=32, per_class=30, seed=7
)
print("source samples:", bundle.source_features.shape[0])
print("target samples:", bundle.target_features.shape[0])
print("seen mask:", bundle.seen_mask.astype(int))

# floor first: raw target features against the pooled class text, nothing trained
floor = zero_shot_baseline(
    bundle.target_features,
    bundle.target_eval_labels,
    bundle.seen_mask,
    pool_synonyms(synonyms),
)
print("\nbaseline  seen %.2f  unseen %.2f  h %.2f"
      % (floor.seen_acc, floor.unseen_acc, floor.h_score))

cfg = RunConfig(seed=7, warmup_epochs=3, joint_epochs=10, batch_size=32)
model = build_model(graph, synonyms, cfg)

state = train_run(
    model,
    bundle.source_features,
    bundle.source_labels,
    bundle.seen_mask,
    bundle.target_features,
)
print("steps taken:", state.step)
print("first log line: ", state.log_lines[0])
print("last log line:  ", state.log_lines[-1])

after = evaluate(
    bundle.target_features, bundle.target_eval_labels, bundle.seen_mask, model
)
print("\ntrained   seen %.2f  unseen %.2f  h %.2f"
      % (after.seen_acc, after.unseen_acc, after.h_score))
print("h gain over baseline: %.2f" % (after.h_score - floor.h_score))

# the confusion matrix rows are true classes; the diagonal is what we want fat
np.set_printoptions(linewidth=120)
print("\nconfusion:\n", after.confusion)
