"""
Process-wide logging for tdu.

Every module asks :class:`Logger` for a named logger. Handlers are built from
the ``logging.*`` config keys; the console handler writes to stderr because
stdout carries the JSON documents the CLI prints.
"""

import logging
import sys
from logging.handlers import RotatingFileHandler
from pathlib import Path
from typing import Dict, List

from src.core.config.config_manager import ConfigManager

DEFAULT_FORMAT = '%(asctime)s - %(name)s - %(levelname)s - %(message)s'


def _resolve_level(name: object) -> int:
    return getattr(logging, str(name).upper(), logging.INFO)


class Logger:
    """Registry of configured loggers, one per module name."""

    _loggers: Dict[str, logging.Logger] = {}

    @classmethod
    def get_logger(cls, name: str) -> logging.Logger:
        """
        Return the logger for ``name``, configuring it on first use.

        Args:
            name: Usually ``__name__`` of the calling module

        Returns:
            logging.Logger that does not propagate to the root logger
        """
        cached = cls._loggers.get(name)
        if cached is not None:
            return cached

        config = ConfigManager()
        logger = logging.getLogger(name)
        logger.setLevel(_resolve_level(config.get('logging.level', 'INFO')))
        if not logger.handlers:
            for handler in cls._build_handlers(config):
                logger.addHandler(handler)
        logger.propagate = False
        cls._loggers[name] = logger
        return logger

    @classmethod
    def set_level(cls, level_name: str) -> None:
        """
        Apply ``--log-level`` to existing loggers and to those created later.

        Args:
            level_name: 'DEBUG', 'INFO', 'WARNING', ...
        """
        ConfigManager()._config.setdefault('logging', {})['level'] = level_name.upper()
        level = _resolve_level(level_name)
        for logger in cls._loggers.values():
            logger.setLevel(level)

    @staticmethod
    def progress_interval() -> int:
        """Steps between DEBUG progress lines of the training loops."""
        return max(1, int(ConfigManager().get('logging.train_every', 100)))

    @staticmethod
    def _build_handlers(config: ConfigManager) -> List[logging.Handler]:
        formatter = logging.Formatter(config.get('logging.format', DEFAULT_FORMAT))
        handlers: List[logging.Handler] = []

        if config.get('logging.console.enabled', True):
            handlers.append(logging.StreamHandler(sys.stderr))

        if config.get('logging.file.enabled', False):
            path = Path(config.get('logging.file.path', 'logs/tdu.log'))
            try:
                path.parent.mkdir(parents=True, exist_ok=True)
                handlers.append(RotatingFileHandler(
                    path,
                    maxBytes=int(config.get('logging.file.max_bytes', 10485760)),
                    backupCount=int(config.get('logging.file.backup_count', 5)),
                ))
            except (OSError, ValueError) as e:
                print(f"tdu: log file {path} unavailable ({e}); logging to stderr only",
                      file=sys.stderr)

        for handler in handlers:
            handler.setFormatter(formatter)
        return handlers
