"""
Layered configuration for tdu.

YAML layers hold the defaults of every section. User config files and
command-line flags are merged over them by :meth:`ConfigManager.resolve_section`.
"""

import dataclasses
import os
from pathlib import Path
from typing import Any, Dict, Mapping, Optional, Type, TypeVar

import yaml
from dotenv import load_dotenv

from src.core.errors.exceptions import ConfigurationError

C = TypeVar('C')


class ConfigManager:
    """
    Process-wide configuration singleton.

    Layers ``base.yaml``, ``<APP_ENV>.yaml`` and ``local.yaml`` from the
    project's ``config`` directory. A ``.env`` file in the project root is
    read first so ``APP_ENV`` and ``TDU_SEED`` may be set there.
    """

    _instance: Optional['ConfigManager'] = None
    _config: Dict[str, Any] = {}

    def __new__(cls) -> 'ConfigManager':
        """Implement singleton pattern."""
        if cls._instance is None:
            cls._instance = super().__new__(cls)
        return cls._instance

    def __init__(self) -> None:
        """Initialize the configuration manager."""
        if not self._config:
            self._load_config()

    def _load_config(self) -> None:
        """Load configuration from YAML files."""
        load_dotenv(self._get_project_root() / '.env', override=False)
        config_dir = self._get_config_directory()
        environment = os.getenv('APP_ENV', 'development')

        config: Dict[str, Any] = {}
        for name in ('base.yaml', f'{environment}.yaml', 'local.yaml'):
            path = config_dir / name
            if path.exists():
                with open(path, 'r', encoding='utf-8') as f:
                    self._deep_update(config, yaml.safe_load(f) or {})
        self._config = config

    @staticmethod
    def _get_project_root() -> Path:
        """Get the project root (parent of the src directory)."""
        return Path(__file__).parent.parent.parent.parent

    @classmethod
    def _get_config_directory(cls) -> Path:
        """Get the configuration directory path."""
        return cls._get_project_root() / 'config'

    @staticmethod
    def _deep_update(base: dict, update: dict) -> None:
        """Recursively update nested dictionaries."""
        for key, value in update.items():
            if isinstance(value, dict) and key in base and isinstance(base[key], dict):
                ConfigManager._deep_update(base[key], value)
            else:
                base[key] = value

    def get(self, key: str, default: Any = None) -> Any:
        """
        Get a configuration value by key.

        Supports nested keys using dot notation (e.g., 'training.lr').

        Args:
            key: Configuration key (supports dot notation)
            default: Default value if key not found

        Returns:
            Configuration value or default
        """
        keys = key.split('.')
        value = self._config

        for k in keys:
            if isinstance(value, dict) and k in value:
                value = value[k]
            else:
                return default

        return value

    def get_all(self) -> Dict[str, Any]:
        """
        Get all configuration values.

        Returns:
            Complete configuration dictionary
        """
        return self._config.copy()

    def reload(self) -> None:
        """Reload configuration from files."""
        self._config = {}
        self._load_config()

    def default_seed(self) -> int:
        """Seed from ``TDU_SEED`` if set, else ``app.seed``."""
        raw = os.getenv('TDU_SEED')
        if raw is None or raw.strip() == '':
            return int(self.get('app.seed', 0))
        try:
            return int(raw)
        except ValueError as e:
            raise ConfigurationError(
                "TDU_SEED must be an integer",
                {'TDU_SEED': raw}
            ) from e

    @staticmethod
    def load_file(path: Optional[str]) -> Dict[str, Any]:
        """
        Load a user configuration file (JSON or YAML).

        Args:
            path: File path, or None for no file

        Returns:
            Parsed mapping (empty when path is None)

        Raises:
            ConfigurationError: If the file is missing or not a mapping
        """
        if path is None:
            return {}
        file_path = Path(path)
        if not file_path.exists():
            raise ConfigurationError(
                f"Config file not found: {path}",
                {'path': str(path)}
            )
        with open(file_path, 'r', encoding='utf-8') as f:
            try:
                data = yaml.safe_load(f) or {}
            except yaml.YAMLError as e:
                raise ConfigurationError(
                    f"Config file is not valid JSON/YAML: {e}",
                    {'path': str(path)}
                ) from e
        if not isinstance(data, dict):
            raise ConfigurationError(
                "Config file must contain a mapping",
                {'path': str(path)}
            )
        return data

    def resolve_section(
        self,
        section: str,
        target: Type[C],
        file_config: Optional[Mapping[str, Any]] = None,
        overrides: Optional[Mapping[str, Any]] = None
    ) -> C:
        """
        Build a config dataclass for one section.

        Precedence (highest first): overrides, file_config[section], the
        YAML layers, the dataclass defaults. ``None`` overrides are ignored.

        Args:
            section: Top-level section name (e.g. 'training')
            target: Dataclass type to construct
            file_config: Parsed user config file
            overrides: Values from command-line flags

        Returns:
            Instance of ``target``

        Raises:
            ConfigurationError: On keys unknown to ``target``
        """
        known = {f.name for f in dataclasses.fields(target)}
        merged: Dict[str, Any] = {}
        layers = (
            self.get(section, {}) or {},
            (file_config or {}).get(section, {}) or {},
            {k: v for k, v in (overrides or {}).items() if v is not None},
        )
        for layer in layers:
            unknown = sorted(set(layer) - known)
            if unknown:
                raise ConfigurationError(
                    f"Unknown keys in '{section}' configuration: {unknown}",
                    {'section': section, 'unknown': unknown}
                )
            merged.update(layer)
        try:
            return target(**merged)
        except (TypeError, ValueError) as e:
            raise ConfigurationError(
                f"Invalid '{section}' configuration: {e}",
                {'section': section}
            ) from e
