import json

import pytest

from nlcmd import EngineConfig, load_config
from nlcmd.errors import ConfigError, InvalidThresholds


def test_defaults_valid():
    cfg = EngineConfig().validate()
    assert cfg.theta_exec == 0.8
    assert cfg.gamma == 0.65
    assert cfg.question_budget == 4
    assert cfg.rephrase_budget == 2
    assert cfg.top_k == 3


def test_load_file(tmp_path):
    path = tmp_path / "cfg.json"
    path.write_text(json.dumps({"gamma": 0.7, "question_budget": 6}))
    cfg = load_config(path)
    assert cfg.gamma == 0.7
    assert cfg.question_budget == 6
    assert cfg.theta_exec == 0.8  # untouched default


def test_unknown_key_rejected(tmp_path):
    path = tmp_path / "cfg.json"
    path.write_text(json.dumps({"gamme": 0.7}))
    with pytest.raises(ConfigError):
        load_config(path)


def test_bad_thresholds(tmp_path):
    path = tmp_path / "cfg.json"
    path.write_text(json.dumps({"theta_exec": 0.2, "gamma": 0.5}))
    with pytest.raises(InvalidThresholds):
        load_config(path)


def test_not_an_object(tmp_path):
    path = tmp_path / "cfg.json"
    path.write_text("[1, 2]")
    with pytest.raises(ConfigError):
        load_config(path)


def test_missing_file(tmp_path):
    with pytest.raises(ConfigError):
        load_config(tmp_path / "nope.json")
