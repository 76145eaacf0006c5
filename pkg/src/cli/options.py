"""
Command-line configuration: key=value files and per-key flags.

Every dataclass field of a command's configuration sections becomes a
``--key`` flag. Values resolve as defaults < preset < config file < flags.
"""

import argparse
import dataclasses
import typing
from pathlib import Path
from typing import Any, Dict, Optional, Sequence, Type, Union

from config.runtime_settings import DEFAULT_THREADS
from ..core.exceptions import ConfigurationError, UsageError

PathLike = Union[str, Path]

# Keys served by the common flags rather than per-section flags
COMMON_KEYS = ('seed', 'threads')

_TRUE = ('1', 'true', 'yes', 'on')
_FALSE = ('0', 'false', 'no', 'off')


class UsageParser(argparse.ArgumentParser):
    """ArgumentParser that raises UsageError instead of exiting with status 2."""

    def error(self, message):
        raise UsageError(f'{self.prog}: {message}', usage=self.format_usage())


def parse_bool(text: str) -> bool:
    lowered = text.strip().lower()
    if lowered in _TRUE:
        return True
    if lowered in _FALSE:
        return False
    raise ValueError(f'expected a boolean, got {text!r}')


def coerce(text: str, annotation: Any) -> Any:
    """
    Convert a string to a dataclass field type.

    Supports int, float, bool, str, Optional[...] ("none" for None) and
    variable-length tuples written as comma-separated values.
    """
    origin = typing.get_origin(annotation)
    args = typing.get_args(annotation)
    if origin is Union:
        inner = [a for a in args if a is not type(None)]
        if text.strip().lower() in ('none', 'null', ''):
            return None
        return coerce(text, inner[0])
    if origin in (tuple, list):
        item = args[0] if args else str
        parts = [p for p in text.split(',') if p.strip()]
        return tuple(coerce(p.strip(), item) for p in parts)
    if annotation is bool:
        return parse_bool(text)
    if annotation is int:
        return int(text)
    if annotation is float:
        return float(text)
    return text.strip()


def field_types(sections: Sequence[Type]) -> Dict[str, Any]:
    """Key -> type over every section; shared keys must agree on type."""
    types: Dict[str, Any] = {}
    for cls in sections:
        hints = typing.get_type_hints(cls)
        for f in dataclasses.fields(cls):
            types.setdefault(f.name, hints[f.name])
    return types


def read_config_file(path: PathLike, known: Dict[str, Any]) -> Dict[str, Any]:
    """
    Parse UTF-8 key=value lines; '#' starts a comment.

    Raises:
        ConfigurationError: Naming file, line and key on unknown keys or bad values
    """
    path = Path(path)
    try:
        lines = path.read_text(encoding='utf-8').splitlines()
    except (OSError, UnicodeDecodeError) as e:
        raise ConfigurationError(f'cannot read config ({e})', source=str(path))
    values: Dict[str, Any] = {}
    for lineno, raw in enumerate(lines, start=1):
        line = raw.split('#', 1)[0].strip()
        if not line:
            continue
        source = f'{path}:{lineno}'
        if '=' not in line:
            raise ConfigurationError('expected key=value', source=source)
        key, value = (part.strip() for part in line.split('=', 1))
        if key not in known:
            raise ConfigurationError('unknown key', key=key, source=source)
        try:
            values[key] = coerce(value, known[key])
        except (ValueError, IndexError) as e:
            raise ConfigurationError(str(e), key=key, source=source)
    return values


def _describe(annotation: Any) -> str:
    origin = typing.get_origin(annotation)
    if origin is Union:
        return _describe([a for a in typing.get_args(annotation) if a is not type(None)][0])
    if origin in (tuple, list):
        return 'LIST'
    return getattr(annotation, '__name__', 'VALUE').upper()


def add_common_options(parser: argparse.ArgumentParser) -> None:
    parser.add_argument('--config', metavar='PATH', help='key=value configuration file')
    parser.add_argument('--seed', type=int, default=None, help='random seed (default: 0)')
    parser.add_argument('--threads', type=int, default=DEFAULT_THREADS,
                        help=f'worker cap (default: {DEFAULT_THREADS})')
    parser.add_argument('--out', metavar='DIR', default='.', help="output directory (default: '.')")


def add_section_options(parser: argparse.ArgumentParser, sections: Sequence[Type]) -> None:
    """One --key flag per dataclass field; help shows the default."""
    group = parser.add_argument_group('configuration keys')
    seen = set(COMMON_KEYS)
    for cls in sections:
        hints = typing.get_type_hints(cls)
        for f in dataclasses.fields(cls):
            if f.name in seen:
                continue
            seen.add(f.name)
            default = f.default if f.default is not dataclasses.MISSING else None
            group.add_argument(
                f'--{f.name}', dest=f'key_{f.name}', metavar=_describe(hints[f.name]),
                default=None, help=f'default: {default!r}'
            )


def resolve(sections: Sequence[Type], args: argparse.Namespace,
            preset: Optional[Dict[str, Any]] = None) -> Dict[str, Any]:
    """
    Merged key values: preset, then config file, then flags.

    Raises:
        ConfigurationError: On unknown keys or values that do not parse
    """
    known = field_types(sections)
    values: Dict[str, Any] = dict(preset or {})
    if getattr(args, 'config', None):
        values.update(read_config_file(args.config, known))
    for key, annotation in known.items():
        raw = getattr(args, f'key_{key}', None)
        if raw is None:
            continue
        try:
            values[key] = coerce(raw, annotation)
        except (ValueError, IndexError) as e:
            raise ConfigurationError(str(e), key=key, source='--' + key)
    if getattr(args, 'seed', None) is not None:
        values['seed'] = args.seed
    return values


def build(cls: Type, values: Dict[str, Any], **fixed) -> Any:
    """Instantiate a section dataclass from the keys it owns."""
    names = {f.name for f in dataclasses.fields(cls)}
    kwargs = {k: v for k, v in values.items() if k in names}
    kwargs.update(fixed)
    return cls(**kwargs)
