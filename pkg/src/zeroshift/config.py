"""Run configuration: every hyperparameter and ablation toggle in one flat
key=value record, so an experiment is reproducible from a single diffable
file plus a seed."""

from __future__ import annotations

import math
from dataclasses import dataclass, fields, replace
from pathlib import Path

from .errors import ConfigError


@dataclass
class RunConfig:
    beta: float = 1.0  # alignment-retention weight
    gamma: float = 0.1  # relation-structure weight
    temperature: float = 30.0  # logit scale multiplier on cosine similarities
    margin: float = 0.1  # pairwise ranking margin
    lr_adapter: float = 1e-3
    lr_prototype: float = 1e-3
    warmup_epochs: int = 5
    joint_epochs: int = 20
    batch_size: int = 64
    seed: int = 0
    token_count: int = 8  # adapter splits each feature into this many tokens
    use_attention_adapter: bool = True
    use_gcn: bool = True
    use_residual_projector: bool = True
    srs_on_source: bool = True
    srs_on_target: bool = True
    align_on_source: bool = True
    align_on_target: bool = True

    def validate(self):
        if not (self.beta >= 0 and math.isfinite(self.beta)):
            raise ConfigError(f"beta must be >= 0, got {self.beta}")
        if not (self.gamma >= 0 and math.isfinite(self.gamma)):
            raise ConfigError(f"gamma must be >= 0, got {self.gamma}")
        if not (self.temperature > 0 and math.isfinite(self.temperature)):
            raise ConfigError(f"temperature must be > 0, got {self.temperature}")
        if not (self.margin >= 0 and math.isfinite(self.margin)):
            raise ConfigError(f"margin must be >= 0, got {self.margin}")
        for name in ("lr_adapter", "lr_prototype"):
            value = getattr(self, name)
            if not (value >= 0 and math.isfinite(value)):
                raise ConfigError(f"{name} must be >= 0, got {value}")
        for name in ("warmup_epochs", "joint_epochs"):
            if getattr(self, name) < 0:
                raise ConfigError(f"{name} must be >= 0")
        if self.batch_size < 1:
            raise ConfigError("batch_size must be >= 1")
        if self.token_count < 1:
            raise ConfigError("token_count must be >= 1")
        if not (self.use_gcn or self.use_residual_projector):
            raise ConfigError(
                "prototype branch needs use_gcn or use_residual_projector enabled"
            )
        return self

    def to_text(self) -> str:
        out = []
        for f in fields(self):
            value = getattr(self, f.name)
            if f.type == "bool" or isinstance(value, bool):
                out.append(f"{f.name}={'true' if value else 'false'}")
            else:
                out.append(f"{f.name}={value!r}")
        return "".join(line + "\n" for line in out)

    def save(self, path):
        Path(path).write_text(self.to_text())


def _coerce(name: str, kind: type, raw: str):
    raw = raw.strip()
    if kind is bool:
        lowered = raw.lower()
        if lowered in ("true", "1"):
            return True
        if lowered in ("false", "0"):
            return False
        raise ConfigError(f"{name}: expected true/false, got {raw!r}")
    try:
        value = kind(raw)
    except ValueError:
        raise ConfigError(f"{name}: expected {kind.__name__}, got {raw!r}") from None
    if kind is float and not math.isfinite(value):
        raise ConfigError(f"{name}: must be finite, got {raw!r}")
    return value


def parse_items(items, base: RunConfig | None = None) -> RunConfig:
    """Apply ``key=value`` strings on top of a base config. Unknown keys are
    errors, so typos never silently run a default."""
    cfg = RunConfig() if base is None else replace(base)
    types = {f.name: f.type for f in fields(RunConfig)}
    kinds = {"float": float, "int": int, "bool": bool}
    for item in items:
        if "=" not in item:
            raise ConfigError(f"expected key=value, got {item!r}")
        key, raw = item.split("=", 1)
        key = key.strip()
        if key not in types:
            raise ConfigError(f"unknown config key {key!r}")
        setattr(cfg, key, _coerce(key, kinds[types[key]], raw))
    return cfg.validate()


def load_config(path, base: RunConfig | None = None) -> RunConfig:
    lines = []
    for ln in Path(path).read_text().splitlines():
        stripped = ln.strip()
        if stripped and not stripped.startswith("#"):
            lines.append(stripped)
    return parse_items(lines, base)
