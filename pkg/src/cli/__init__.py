"""Batch command-line interface."""

from .runner import run, main, build_parser, format_summary, handle_errors
from .commands import COMMANDS, Command
from .options import UsageParser, read_config_file, coerce, resolve

__all__ = [
    'run',
    'main',
    'build_parser',
    'format_summary',
    'handle_errors',
    'COMMANDS',
    'Command',
    'UsageParser',
    'read_config_file',
    'coerce',
    'resolve'
]
