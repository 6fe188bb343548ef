import json

from src.data.config_manager import DEFAULTS, OUTPUT_ENV, ConfigManager


def test_missing_file_gives_defaults(tmp_path):
    config = ConfigManager(str(tmp_path / "absent.json"))
    assert config.config == DEFAULTS
    assert config.get("sle", "dt") == 1e-3
    assert config.get("sle", "nothing", 7) == 7


def test_partial_file_is_merged_with_defaults(tmp_path):
    path = tmp_path / "config.json"
    path.write_text(json.dumps({"sle": {"dt": 0.01}}))
    config = ConfigManager(str(path))
    assert config.get("sle", "dt") == 0.01
    assert config.get("sle", "swallow_factor") == 10
    assert config.get_section("harness")["closure_tolerance"] == 0.03


def test_corrupt_file_falls_back_to_defaults(tmp_path):
    path = tmp_path / "config.json"
    path.write_text("{not json")
    assert ConfigManager(str(path)).config == DEFAULTS


def test_output_dir_environment_override(tmp_path, monkeypatch):
    config = ConfigManager(str(tmp_path / "absent.json"))
    monkeypatch.delenv(OUTPUT_ENV, raising=False)
    assert config.get_output_dir() == "runs"
    monkeypatch.setenv(OUTPUT_ENV, str(tmp_path / "elsewhere"))
    assert config.get_output_dir() == str(tmp_path / "elsewhere")


def test_save_config_round_trip(tmp_path):
    path = tmp_path / "config.json"
    config = ConfigManager(str(path))
    config.set("harness", "workers", 4)
    config.save_config()
    assert ConfigManager(str(path)).get("harness", "workers") == 4


def test_shipped_config_matches_defaults():
    assert ConfigManager().config == DEFAULTS
