"""
Dataset manifests: JSON index of feature blobs and 1-based annotations.
"""

import json
import logging
from concurrent.futures import ThreadPoolExecutor
from pathlib import Path
from typing import List, Sequence, Union

from config.runtime_settings import DEFAULT_THREADS
from ..core.constants import DATASET_ROLES
from ..core.exceptions import DataError, FormatError
from ..textbank.vocabulary import Vocabulary, load_vocabulary
from .feature_io import read_features, write_features
from .types import ActionAnnotation, DatasetManifest, VideoFeatures

logger = logging.getLogger(__name__)

PathLike = Union[str, Path]


def load_manifest(path: PathLike) -> DatasetManifest:
    """
    Parse a manifest file.

    Raises:
        FormatError: If the JSON is malformed or misses required keys
    """
    path = Path(path)
    try:
        raw = json.loads(path.read_text(encoding='utf-8'))
    except (OSError, UnicodeDecodeError, json.JSONDecodeError) as e:
        raise FormatError(str(path), f'cannot read manifest ({e})')
    if not isinstance(raw, dict):
        raise FormatError(str(path), 'manifest must be a JSON object')
    for key in ('name', 'vocab_path', 'videos'):
        if key not in raw:
            raise FormatError(str(path), f'missing key {key!r}')
    role = raw.get('role', 'test')
    if role not in DATASET_ROLES:
        raise FormatError(str(path), f'unknown role {role!r}')
    if not isinstance(raw['videos'], list):
        raise FormatError(str(path), 'videos must be a list')
    return DatasetManifest(raw['name'], raw['vocab_path'], role, raw['videos'])


def manifest_vocabulary(path: PathLike) -> Vocabulary:
    """Load the vocabulary a manifest refers to (path relative to the manifest)."""
    manifest = load_manifest(path)
    return load_vocabulary(Path(path).parent / manifest.vocab_path)


def _load_entry(entry: dict, root: Path, vocab: Vocabulary, manifest_path: str) -> VideoFeatures:
    try:
        video_id = str(entry['id'])
        blob = root / entry['blob']
        raw_annotations = entry.get('annotations', [])
        annotations = [
            ActionAnnotation(float(a['s']), float(a['e']), int(a['class_id']))
            for a in raw_annotations
        ]
    except (KeyError, TypeError, ValueError) as e:
        raise FormatError(manifest_path, f'bad video entry {entry!r} ({e})')
    snippet, frame = read_features(blob)
    video = VideoFeatures(video_id, snippet, frame, annotations)
    for ann in annotations:
        if ann.class_id not in vocab:
            raise DataError(f'video {video_id}: class {ann.class_id} not in vocabulary')
    video.validate()
    return video


def load_dataset(manifest_path: PathLike, threads: int = DEFAULT_THREADS) -> List[VideoFeatures]:
    """
    Load and validate every video of a manifest.

    Args:
        manifest_path: Manifest JSON file
        threads: Worker cap for blob reading

    Returns:
        VideoFeatures in manifest order

    Raises:
        FormatError: On unreadable manifest or blob (names the path)
        DataError: On annotation bound or class violations (names the video)
    """
    manifest_path = Path(manifest_path)
    manifest = load_manifest(manifest_path)
    root = manifest_path.parent
    vocab = load_vocabulary(root / manifest.vocab_path)
    with ThreadPoolExecutor(max_workers=max(1, threads)) as pool:
        videos = list(pool.map(
            lambda e: _load_entry(e, root, vocab, str(manifest_path)), manifest.videos
        ))
    dims = {(v.snippet.shape[1], v.frame.shape[1]) for v in videos}
    if len(dims) > 1:
        raise FormatError(str(manifest_path), f'videos disagree on feature widths {sorted(dims)}')
    ids = [v.video_id for v in videos]
    if len(set(ids)) != len(ids):
        raise DataError(f'{manifest_path}: duplicate video ids')
    logger.info('loaded %d videos from %s', len(videos), manifest_path)
    return videos


def write_dataset(videos: Sequence[VideoFeatures], vocab_path: PathLike,
                  out_dir: PathLike, name: str, role: str = 'test') -> Path:
    """
    Write blobs and a manifest; returns the manifest path.

    The manifest stores the vocabulary path relative to out_dir.
    """
    out_dir = Path(out_dir)
    (out_dir / 'blobs').mkdir(parents=True, exist_ok=True)
    if role not in DATASET_ROLES:
        raise DataError(f'unknown dataset role {role!r}')
    vocab_path = Path(vocab_path)
    try:
        rel_vocab = vocab_path.resolve().relative_to(out_dir.resolve())
    except ValueError:
        rel_vocab = Path(vocab_path).resolve()
    entries = []
    for video in videos:
        blob = Path('blobs') / f'{video.video_id}.ovft'
        write_features(video.snippet, video.frame, out_dir / blob)
        entries.append({
            'id': video.video_id,
            'blob': blob.as_posix(),
            'annotations': [
                {'s': a.start, 'e': a.end, 'class_id': a.class_id}
                for a in video.annotations
            ],
        })
    manifest = {
        'name': name,
        'vocab_path': Path(rel_vocab).as_posix(),
        'role': role,
        'videos': entries,
    }
    path = out_dir / 'manifest.json'
    path.write_text(json.dumps(manifest, indent=2) + '\n', encoding='utf-8')
    return path
