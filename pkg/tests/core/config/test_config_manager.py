"""
Unit tests for ConfigManager.
"""

import pytest

from src.core.config.config_manager import ConfigManager
from src.core.errors.exceptions import ConfigurationError, ValidationError
from src.nn.config import ModelConfig
from src.training.config import TrainConfig


@pytest.mark.unit
class TestConfigManager:
    """Test suite for ConfigManager class."""

    def test_singleton_pattern(self):
        """Test that ConfigManager implements singleton pattern."""
        assert ConfigManager() is ConfigManager()

    def test_get_nested_key(self):
        """Test getting nested configuration using dot notation."""
        config = ConfigManager()
        assert config.get('model.num_layers') == 2
        assert config.get('training.batch_size') == 8

    def test_get_nonexistent_key_with_default(self):
        """Test getting non-existent key returns default value."""
        assert ConfigManager().get('nonexistent.key', 'default_value') == 'default_value'

    def test_get_all(self):
        """Test getting all configuration values."""
        all_config = ConfigManager().get_all()
        for section in ('app', 'logging', 'model', 'training', 'pretraining', 'data', 'evaluation'):
            assert section in all_config

    def test_reload_config(self):
        """Test reloading configuration keeps values."""
        config = ConfigManager()
        initial_value = config.get('app.name')
        config.reload()
        assert config.get('app.name') == initial_value

    def test_default_seed_from_environment(self, monkeypatch):
        """TDU_SEED wins over app.seed."""
        monkeypatch.setenv('TDU_SEED', '17')
        assert ConfigManager().default_seed() == 17

    def test_default_seed_fallback(self, monkeypatch):
        monkeypatch.delenv('TDU_SEED', raising=False)
        assert ConfigManager().default_seed() == ConfigManager().get('app.seed', 0)

    def test_default_seed_rejects_garbage(self, monkeypatch):
        monkeypatch.setenv('TDU_SEED', 'seven')
        with pytest.raises(ConfigurationError):
            ConfigManager().default_seed()


@pytest.mark.unit
class TestConfigFiles:
    """load_file and resolve_section."""

    def test_load_file_none(self):
        assert ConfigManager.load_file(None) == {}

    def test_load_yaml_file(self, tmp_path):
        path = tmp_path / 'run.yaml'
        path.write_text("model:\n  hidden_size: 32\n")
        assert ConfigManager.load_file(str(path)) == {'model': {'hidden_size': 32}}

    def test_load_json_file(self, tmp_path):
        path = tmp_path / 'run.json'
        path.write_text('{"training": {"steps": 10}}')
        assert ConfigManager.load_file(str(path))['training']['steps'] == 10

    def test_load_missing_file(self, tmp_path):
        with pytest.raises(ConfigurationError):
            ConfigManager.load_file(str(tmp_path / 'absent.yaml'))

    def test_load_non_mapping(self, tmp_path):
        path = tmp_path / 'list.yaml'
        path.write_text("- 1\n- 2\n")
        with pytest.raises(ConfigurationError):
            ConfigManager.load_file(str(path))

    def test_resolve_precedence(self):
        """Overrides beat the file, which beats the YAML layers."""
        file_config = {'model': {'hidden_size': 32, 'num_heads': 4}}
        config = ConfigManager().resolve_section(
            'model', ModelConfig, file_config, {'hidden_size': 64, 'num_layers': None}
        )
        assert config.hidden_size == 64
        assert config.num_heads == 4
        assert config.num_layers == 2

    def test_resolve_unknown_key(self):
        with pytest.raises(ConfigurationError):
            ConfigManager().resolve_section('training', TrainConfig, {'training': {'epochs': 3}})

    def test_resolve_runs_dataclass_validation(self):
        with pytest.raises(ValidationError):
            ConfigManager().resolve_section('training', TrainConfig, None, {'steps': 0})
