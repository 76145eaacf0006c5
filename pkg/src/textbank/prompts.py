"""
Language-model prompt rendering and the description sidecar.
"""

from pathlib import Path
from typing import Dict, List, Sequence, Union

from ..core.constants import PROMPT_TEMPLATE
from ..core.exceptions import FormatError, UsageError

PathLike = Union[str, Path]


def render_prompt(classname: str) -> str:
    """
    Render the description prompt for one action class.

    Args:
        classname: Action name, used verbatim

    Returns:
        "How can you recognize a video of a person performing the {classname} action?"

    Raises:
        UsageError: If classname is empty
    """
    if not classname:
        raise UsageError('classname must be non-empty')
    return PROMPT_TEMPLATE.format(classname=classname)


def write_description_sidecar(blocks: Dict[int, Sequence[str]], path: PathLike) -> Path:
    """
    Write description strings for audit: one block per class, blank-line separated.
    The first line of each block is the class id.
    """
    path = Path(path)
    path.parent.mkdir(parents=True, exist_ok=True)
    chunks = []
    for class_id in sorted(blocks):
        lines = [str(class_id)]
        lines.extend(d.replace('\n', ' ') for d in blocks[class_id])
        chunks.append('\n'.join(lines))
    path.write_text('\n\n'.join(chunks) + '\n', encoding='utf-8')
    return path


def read_description_sidecar(path: PathLike) -> Dict[int, List[str]]:
    try:
        text = Path(path).read_text(encoding='utf-8')
    except (OSError, UnicodeDecodeError) as e:
        raise FormatError(str(path), f'cannot read sidecar ({e})')
    blocks: Dict[int, List[str]] = {}
    for chunk in text.strip().split('\n\n'):
        lines = [line for line in chunk.splitlines() if line.strip()]
        if not lines:
            continue
        try:
            class_id = int(lines[0])
        except ValueError:
            raise FormatError(str(path), f'block header {lines[0]!r} is not a class id')
        blocks[class_id] = lines[1:]
    return blocks
