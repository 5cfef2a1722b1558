# tests/test_config.py

import json

import pytest

from ucdmt.core.config import Settings, apply_overrides, load_config, validate_config
from ucdmt.core.errors import ConfigError
from ucdmt.schemas.config_schemas import TrainConfig
from ucdmt.schemas.enums import GanMode


def _write(tmp_path, payload):
    path = tmp_path / "config.json"
    path.write_text(json.dumps(payload), encoding="utf-8")
    return path


def test_empty_object_gives_defaults(tmp_path):
    config = load_config(_write(tmp_path, {}))
    assert config == TrainConfig()
    assert config.weights.alpha == 1.0 and config.weights.beta == 0.5
    assert config.lr_gen == 1e-3 and config.lr_dis == 1e-4
    assert config.momentum_beta1 == 0.5


def test_partial_override(tmp_path):
    config = load_config(_write(tmp_path, {"weights": {"alpha": 2.0}}))
    assert config.weights.alpha == 2.0
    assert config.weights.lambda1 == 1.0


def test_negative_weight_reports_key_path(tmp_path):
    with pytest.raises(ConfigError) as info:
        load_config(_write(tmp_path, {"weights": {"alpha": -1}}))
    assert info.value.key_path == "weights.alpha"


def test_unknown_key_rejected():
    with pytest.raises(ConfigError) as info:
        validate_config({"weights": {"gamma": 1.0}})
    assert "gamma" in info.value.key_path


def test_missing_and_malformed_files(tmp_path):
    with pytest.raises(ConfigError):
        load_config(tmp_path / "nope.json")
    bad = tmp_path / "bad.json"
    bad.write_text("{not json", encoding="utf-8")
    with pytest.raises(ConfigError):
        load_config(bad)


def test_seed_override_wins(tmp_path):
    assert load_config(_write(tmp_path, {"seed": 1}), seed_override=42).seed == 42


def test_apply_overrides_creates_levels_and_skips_none():
    raw = apply_overrides({"epochs": 3}, {"weights/disen_off": True, "weights/gan_mode": None, "epochs": 5})
    assert raw == {"epochs": 5, "weights": {"disen_off": True}}


def test_overrides_without_file():
    config = load_config(None, overrides={"weights/gan_mode": "minimax"})
    assert config.weights.gan_mode == GanMode.MINIMAX


def test_settings_from_environment(monkeypatch):
    monkeypatch.setenv("UCDMT_SEED", "99")
    monkeypatch.setenv("UCDMT_WORKERS", "2")
    settings = Settings()
    assert settings.UCDMT_SEED == 99
    assert settings.UCDMT_WORKERS == 2


def test_settings_only_declare_consumed_variables():
    # cada variable se consume en main.py
    assert set(Settings.model_fields) == {
        "UCDMT_SEED", "UCDMT_WORKERS", "UCDMT_LOG_LEVEL", "UCDMT_PIPELINE_CONFIG",
    }
