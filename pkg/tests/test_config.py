import json

import pytest

from mateforge.config import CONFIG_ENV_VAR, ConfigError, ToleranceConfig, load_config


def test_defaults_without_file(monkeypatch):
    monkeypatch.delenv(CONFIG_ENV_VAR, raising=False)
    assert load_config() == ToleranceConfig()


def test_file_and_seed_override(tmp_path):
    p = tmp_path / "c.json"
    p.write_text(json.dumps({"dist_tol": 0.01, "seed": 4}))
    c = load_config(str(p))
    assert c.dist_tol == 0.01 and c.seed == 4
    assert load_config(str(p), seed=9).seed == 9


def test_env_var(tmp_path, monkeypatch):
    p = tmp_path / "c.json"
    p.write_text(json.dumps({"angle_tol": 0.5}))
    monkeypatch.setenv(CONFIG_ENV_VAR, str(p))
    assert load_config().angle_tol == 0.5


@pytest.mark.parametrize(
    "data",
    [{"bogus": 1}, {"dist_tol": 0}, {"contact_tol": -1.0}, {"sweep_angles_deg": []}, {"smoothing": 0.5}, [1, 2]],
)
def test_invalid(tmp_path, data):
    p = tmp_path / "c.json"
    p.write_text(json.dumps(data))
    with pytest.raises(ConfigError):
        load_config(str(p))


def test_unreadable(tmp_path):
    with pytest.raises(ConfigError):
        load_config(str(tmp_path / "missing.json"))


def test_round_trip_dict():
    c = ToleranceConfig(contact_tol=0.2, sweep_angles_deg=(3, 6))
    assert ToleranceConfig.from_dict(json.loads(json.dumps(c.to_dict()))) == c
