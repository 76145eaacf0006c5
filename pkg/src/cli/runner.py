"""
Command-line entry point.

Exit codes: 0 success, 1 usage or configuration error, 2 data or format
error (and anything unexpected), 3 numeric failure.
"""

import logging
import sys
from functools import wraps
from pathlib import Path
from typing import Optional, Sequence, TextIO

from ..core.exceptions import OVFormerError
from ..core.log import configure_logging
from .commands import COMMANDS, Summary
from .options import UsageParser, add_common_options, add_section_options

logger = logging.getLogger(__name__)

EXIT_OK = 0
EXIT_UNEXPECTED = 2


def build_parser() -> UsageParser:
    parser = UsageParser(prog='ovformer',
                         description='Open-vocabulary temporal action localization')
    subparsers = parser.add_subparsers(dest='command', metavar='COMMAND', required=True)
    for name, command in COMMANDS.items():
        sub = subparsers.add_parser(name, help=command.help, description=command.help)
        add_common_options(sub)
        command.arguments(sub)
        add_section_options(sub, command.sections)
    return parser


def format_summary(summary: Summary) -> str:
    """One line of key=value pairs (None as null, paths as posix)."""
    if isinstance(summary, str):
        return summary
    parts = []
    for key, value in summary.items():
        if value is None:
            text = 'null'
        elif isinstance(value, Path):
            text = value.as_posix()
        elif isinstance(value, float):
            text = repr(value)
        else:
            text = str(value)
        parts.append(f'{key}={text}')
    return ' '.join(parts)


def handle_errors(f):
    """
    Decorator mapping toolkit exceptions to exit codes and one stderr line.
    """
    @wraps(f)
    def decorated_function(argv, stdout=None, stderr=None):
        stderr = stderr or sys.stderr
        try:
            return f(argv, stdout=stdout, stderr=stderr)
        except OVFormerError as e:
            if getattr(e, 'usage', None):
                stderr.write(e.usage)
            print(f'error: {e}', file=stderr)
            return e.exit_code
        except SystemExit as e:
            # argparse --help
            return e.code if isinstance(e.code, int) else EXIT_OK
        except Exception as e:
            logger.debug('unexpected failure', exc_info=True)
            print(f'error: unexpected {type(e).__name__}: {e}', file=stderr)
            return EXIT_UNEXPECTED
    return decorated_function


@handle_errors
def run(argv: Sequence[str], stdout: Optional[TextIO] = None,
        stderr: Optional[TextIO] = None) -> int:
    """
    Parse argv, run one subcommand and print its summary.

    Returns:
        Process exit code
    """
    stdout = stdout or sys.stdout
    args = build_parser().parse_args(list(argv))
    command = COMMANDS[args.command]
    logger.debug('running %s', args.command)
    summary = command.handler(args)
    print(format_summary(summary), file=stdout)
    return EXIT_OK


def main() -> None:
    configure_logging()
    sys.exit(run(sys.argv[1:]))
