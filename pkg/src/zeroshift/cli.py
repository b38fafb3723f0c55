"""Command-line entry point.

Subcommands cover the whole workflow: generate a synthetic benchmark,
train, evaluate a checkpoint, verify gradients, export adapted features,
and print the effective configuration. Shared flags: --config PATH loads a
key=value file over the defaults, repeated --set key=value overrides on
top of that, --out DIR selects where artifacts land. Commands reading a
benchmark take --data DIR; commands reading a checkpoint take --run DIR.

On failure the exit status is nonzero and the last line written to stderr
is ``error: <ErrorType>: <message>``.
"""

from __future__ import annotations

import argparse
import sys
from pathlib import Path

from .config import RunConfig, load_config, parse_items
from .errors import ConfigError, ZeroShiftError
from .evaluation import evaluate, export_features, zero_shot_baseline
from .gradcheck import LOSS_NAMES, TOLERANCE, check_all
from .io import load_benchmark, save_benchmark
from .model import build_model, load_checkpoint, save_checkpoint
from .prototypes import pool_synonyms
from .synth import synth_generate
from .trainer import train_run

METRICS_FILE = "metrics.log"
EVAL_FILE = "eval.txt"

_SYNTH_KEYS = {
    "c_seen": int,
    "c_unseen": int,
    "dim": int,
    "per_class": int,
    "shift_angle": float,
    "noise_sigma": float,
    "seed": int,
}


def _effective_config(args) -> RunConfig:
    cfg = RunConfig()
    if getattr(args, "config", None):
        cfg = load_config(args.config, cfg)
    return parse_items(getattr(args, "set", None) or [], cfg)


def _parse_synth_args(items) -> dict:
    out = {}
    for item in items or []:
        if "=" not in item:
            raise ConfigError(f"expected key=value, got {item!r}")
        key, raw = item.split("=", 1)
        key = key.strip()
        kind = _SYNTH_KEYS.get(key)
        if kind is None:
            raise ConfigError(f"unknown benchmark key {key!r}")
        try:
            out[key] = kind(raw.strip())
        except ValueError:
            raise ConfigError(f"{key}: expected {kind.__name__}, got {raw!r}") from None
    return out


def _cmd_synth_gen(args) -> int:
    bundle, graph, synonyms = synth_generate(**_parse_synth_args(args.set))
    save_benchmark(args.out, bundle, graph, synonyms)
    print(f"benchmark written to {args.out}")
    return 0


def _cmd_train(args) -> int:
    cfg = _effective_config(args)
    bundle, graph, synonyms = load_benchmark(args.data)
    model = build_model(graph, synonyms, cfg)
    state = train_run(
        model,
        bundle.source_features,
        bundle.source_labels,
        bundle.seen_mask,
        bundle.target_features,
    )
    report = evaluate(
        bundle.target_features, bundle.target_eval_labels, bundle.seen_mask, model
    )
    out = Path(args.out)
    out.mkdir(parents=True, exist_ok=True)
    with open(out / METRICS_FILE, "w") as fh:
        for line in state.log_lines:
            fh.write(line + "\n")
        fh.write(report.as_text())
    save_checkpoint(model, out)
    sys.stdout.write(report.as_text())
    return 0


def _cmd_eval(args) -> int:
    bundle, graph, synonyms = load_benchmark(args.data)
    if args.baseline:
        report = zero_shot_baseline(
            bundle.target_features,
            bundle.target_eval_labels,
            bundle.seen_mask,
            pool_synonyms(synonyms),
        )
    else:
        model = load_checkpoint(args.run, graph, synonyms)
        report = evaluate(
            bundle.target_features, bundle.target_eval_labels, bundle.seen_mask, model
        )
    if args.out:
        out = Path(args.out)
        out.mkdir(parents=True, exist_ok=True)
        (out / EVAL_FILE).write_text(report.as_text())
    sys.stdout.write(report.as_text())
    return 0


def _cmd_grad_check(args) -> int:
    seed = 0
    for item in args.set or []:
        key, eq, raw = item.partition("=")
        if key.strip() != "seed" or not eq:
            raise ConfigError(f"grad-check only accepts seed=N, got {item!r}")
        try:
            seed = int(raw.strip())
        except ValueError:
            raise ConfigError(f"seed: expected int, got {raw!r}") from None
    results = check_all(seed)
    overall = 0.0
    for name in LOSS_NAMES:
        for pname, err in results[name].items():
            print(f"loss={name} param={pname} max_rel_err={err!r}")
            overall = max(overall, err)
    print(f"overall_max_rel_err={overall!r}")
    return 0 if overall <= TOLERANCE else 1


def _cmd_export_features(args) -> int:
    bundle, graph, synonyms = load_benchmark(args.data)
    model = load_checkpoint(args.run, graph, synonyms)
    written = export_features(
        model,
        bundle.target_features,
        args.out,
        project_to_2d=args.project_2d,
        labels=bundle.target_eval_labels,
    )
    for path in written:
        print(path)
    return 0


def _cmd_show_config(args) -> int:
    sys.stdout.write(_effective_config(args).to_text())
    return 0


def _add_config_flags(sub):
    sub.add_argument("--config", help="key=value config file applied over defaults")
    sub.add_argument(
        "--set", action="append", metavar="KEY=VALUE", help="override one config key"
    )


def build_parser() -> argparse.ArgumentParser:
    parser = argparse.ArgumentParser(
        prog="zeroshift",
        description="domain-adaptive zero-shot training in embedding space",
    )
    subs = parser.add_subparsers(dest="command", required=True)

    p = subs.add_parser("synth-gen", help="generate a synthetic benchmark directory")
    p.add_argument("--out", required=True, help="directory to write the benchmark")
    p.add_argument("--set", action="append", metavar="KEY=VALUE",
                   help="benchmark knob: c_seen, c_unseen, dim, per_class, "
                        "shift_angle, noise_sigma, seed")
    p.set_defaults(func=_cmd_synth_gen)

    p = subs.add_parser("train", help="train on a benchmark and write artifacts")
    p.add_argument("--data", required=True, help="benchmark directory")
    p.add_argument("--out", required=True, help="run directory for checkpoint and logs")
    _add_config_flags(p)
    p.set_defaults(func=_cmd_train)

    p = subs.add_parser("eval", help="score a checkpoint (or the raw baseline)")
    p.add_argument("--data", required=True, help="benchmark directory")
    p.add_argument("--run", help="checkpoint directory from a train run")
    p.add_argument("--out", help="directory to write the report")
    p.add_argument("--baseline", action="store_true",
                   help="score raw features against pooled class text instead")
    p.set_defaults(func=_cmd_eval)

    p = subs.add_parser("grad-check", help="finite-difference check of all losses")
    p.add_argument("--set", action="append", metavar="KEY=VALUE",
                   help="seed=N for the check instance")
    p.set_defaults(func=_cmd_grad_check)

    p = subs.add_parser("export-features", help="write adapted target features")
    p.add_argument("--data", required=True, help="benchmark directory")
    p.add_argument("--run", required=True, help="checkpoint directory")
    p.add_argument("--out", required=True, help="directory for exported files")
    p.add_argument("--project-2d", action="store_true",
                   help="also write a 2-d principal-component projection")
    p.set_defaults(func=_cmd_export_features)

    p = subs.add_parser("show-config", help="print the effective configuration")
    _add_config_flags(p)
    p.set_defaults(func=_cmd_show_config)
    return parser


def main(argv=None) -> int:
    args = build_parser().parse_args(argv)
    if args.command == "eval" and not args.baseline and not args.run:
        print("error: ConfigError: eval needs --run or --baseline", file=sys.stderr)
        return 2
    try:
        return args.func(args)
    except ZeroShiftError as exc:
        print(f"error: {type(exc).__name__}: {exc}", file=sys.stderr)
        return 2
    except OSError as exc:
        print(f"error: {type(exc).__name__}: {exc}", file=sys.stderr)
        return 2


if __name__ == "__main__":
    sys.exit(main())
