"""Logging setup for command-line runs."""

import logging
from typing import Optional

from config.runtime_settings import LOG_FORMAT, LOG_LEVEL, LOG_LEVELS

_LEVELS = {
    'error': logging.ERROR,
    'info': logging.INFO,
    'debug': logging.DEBUG,
}


def configure_logging(level: Optional[str] = None) -> None:
    """
    Install one stderr handler on the package logger.

    Args:
        level: error|info|debug; defaults to OVFORMER_LOG
    """
    name = (level or LOG_LEVEL).lower()
    if name not in LOG_LEVELS:
        name = 'info'
    root = logging.getLogger('src')
    for handler in list(root.handlers):
        root.removeHandler(handler)
    handler = logging.StreamHandler()
    handler.setFormatter(logging.Formatter(LOG_FORMAT))
    root.addHandler(handler)
    root.setLevel(_LEVELS[name])
    root.propagate = False
