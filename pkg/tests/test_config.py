"""
Tests for config.py - defaults, key=value files, the environment fallback
and overrides.
"""
from __future__ import annotations

import pytest

from plasticity_symmetry.config import CONFIG_ENV, ConfigError, Settings, load_settings


@pytest.fixture(autouse=True)
def _no_config_env(monkeypatch):
    monkeypatch.delenv(CONFIG_ENV, raising=False)


def _write(tmp_path, text: str):
    path = tmp_path / "run.cfg"
    path.write_text(text, encoding="utf-8")
    return path


class TestLoadSettings:
    def test_defaults(self):
        s = load_settings()
        assert s == Settings()
        assert s.trials == 32

    def test_file_values_are_coerced(self, tmp_path):
        s = load_settings(_write(tmp_path, "trials=12\nrho=2.5\nrecord_timing=true\n"))
        assert s.trials == 12
        assert s.rho == 2.5
        assert s.record_timing is True

    def test_keys_are_case_insensitive(self, tmp_path):
        assert load_settings(_write(tmp_path, "SEED=7\n")).seed == 7

    def test_grids_read_from_comma_lists(self, tmp_path):
        s = load_settings(_write(tmp_path, "grid_a=1, 2,3\nroot_window=-1,1\n"))
        assert s.grid_a == (1.0, 2.0, 3.0)
        assert s.root_window == (-1.0, 1.0)

    def test_environment_names_the_file(self, tmp_path, monkeypatch):
        monkeypatch.setenv(CONFIG_ENV, str(_write(tmp_path, "degree=2\n")))
        assert load_settings().degree == 2

    def test_overrides_win_and_none_is_ignored(self, tmp_path):
        path = _write(tmp_path, "trials=12\nseed=3\n")
        s = load_settings(path, {"trials": 40, "seed": None})
        assert s.trials == 40
        assert s.seed == 3, "a None override leaves the file value alone"

    def test_missing_file_raises(self, tmp_path):
        with pytest.raises(ConfigError):
            load_settings(tmp_path / "absent.cfg")

    def test_unknown_key_raises(self, tmp_path):
        with pytest.raises(ConfigError) as exc:
            load_settings(_write(tmp_path, "trails=12\n"))
        assert "trails" in str(exc.value)

    def test_bad_log_level_raises(self):
        with pytest.raises(ConfigError):
            load_settings(overrides={"log_level": "chatty"})

    def test_log_level_is_normalised(self):
        assert load_settings(overrides={"log_level": "debug"}).log_level == "DEBUG"
