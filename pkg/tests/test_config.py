"""Config schema: defaults, overrides, files, and rejection of bad input."""

import pytest

from zeroshift.config import RunConfig, load_config, parse_items
from zeroshift.errors import ConfigError


def test_defaults():
    cfg = RunConfig()
    assert cfg.beta == 1.0
    assert cfg.gamma == 0.1
    assert cfg.temperature == 30.0
    assert cfg.margin == 0.1
    assert cfg.warmup_epochs == 5
    assert cfg.joint_epochs == 20
    assert cfg.use_gcn and cfg.use_attention_adapter and cfg.use_residual_projector
    assert cfg.srs_on_source and cfg.srs_on_target
    assert cfg.align_on_source and cfg.align_on_target
    cfg.validate()


def test_parse_overrides():
    cfg = parse_items(["beta=2.5", "use_gcn=false", "batch_size=16", "seed=7"])
    assert cfg.beta == 2.5
    assert cfg.use_gcn is False
    assert cfg.batch_size == 16
    assert cfg.seed == 7


def test_parse_does_not_mutate_base():
    base = RunConfig()
    derived = parse_items(["gamma=0.5"], base)
    assert base.gamma == 0.1
    assert derived.gamma == 0.5


def test_unknown_key_rejected():
    with pytest.raises(ConfigError):
        parse_items(["learning_rate=0.1"])


def test_malformed_pairs_rejected():
    with pytest.raises(ConfigError):
        parse_items(["beta"])
    with pytest.raises(ConfigError):
        parse_items(["beta=abc"])
    with pytest.raises(ConfigError):
        parse_items(["use_gcn=maybe"])
    with pytest.raises(ConfigError):
        parse_items(["beta=inf"])


def test_validation_bounds():
    with pytest.raises(ConfigError):
        parse_items(["beta=-1"])
    with pytest.raises(ConfigError):
        parse_items(["temperature=0"])
    with pytest.raises(ConfigError):
        parse_items(["margin=-0.1"])
    with pytest.raises(ConfigError):
        parse_items(["batch_size=0"])
    with pytest.raises(ConfigError):
        parse_items(["token_count=0"])
    with pytest.raises(ConfigError):
        parse_items(["use_gcn=false", "use_residual_projector=false"])


def test_text_round_trip(tmp_path):
    cfg = parse_items(["beta=2.0", "srs_on_target=false", "joint_epochs=3"])
    path = tmp_path / "run.cfg"
    cfg.save(path)
    loaded = load_config(path)
    assert loaded == cfg


def test_file_comments_and_blanks(tmp_path):
    path = tmp_path / "c.cfg"
    path.write_text("# a comment\n\nbeta=3.0\n")
    assert load_config(path).beta == 3.0
