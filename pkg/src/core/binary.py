"""
Little-endian binary codec shared by every on-disk format.
Readers validate as they go and raise FormatError naming the file.
"""

import struct
from pathlib import Path
from typing import BinaryIO, Tuple, Union

import numpy as np

from .exceptions import FormatError

PathLike = Union[str, Path]

_U32 = struct.Struct('<I')


def write_header(stream: BinaryIO, magic: bytes, *fields: int) -> None:
    """Write a 4-byte magic followed by u32 fields."""
    stream.write(magic)
    for value in fields:
        stream.write(_U32.pack(int(value)))


def write_u32(stream: BinaryIO, value: int) -> None:
    stream.write(_U32.pack(int(value)))


def write_f32(stream: BinaryIO, array: np.ndarray) -> None:
    """Write an array as little-endian float32, row-major."""
    stream.write(np.ascontiguousarray(array, dtype='<f4').tobytes())


def write_text(stream: BinaryIO, text: str) -> None:
    """Write a u32 length followed by UTF-8 bytes."""
    raw = text.encode('utf-8')
    write_u32(stream, len(raw))
    stream.write(raw)


class BinaryReader:
    """
    Cursor over a fully-read file buffer.
    Every read is bounds-checked so truncated files fail cleanly.
    """

    def __init__(self, data: bytes, path: PathLike):
        self.data = data
        self.path = str(path)
        self.offset = 0

    @classmethod
    def open(cls, path: PathLike) -> 'BinaryReader':
        try:
            data = Path(path).read_bytes()
        except OSError as e:
            raise FormatError(str(path), f'cannot read file ({e.strerror})')
        return cls(data, path)

    def _take(self, n: int) -> bytes:
        if n < 0 or self.offset + n > len(self.data):
            raise FormatError(
                self.path,
                f'truncated: need {n} bytes at offset {self.offset}, '
                f'file has {len(self.data)}'
            )
        chunk = self.data[self.offset:self.offset + n]
        self.offset += n
        return chunk

    def expect_magic(self, magic: bytes, version: int) -> None:
        """Check the magic and the format version."""
        found = self._take(len(magic))
        if found != magic:
            raise FormatError(self.path, f'bad magic {found!r}, expected {magic!r}')
        found_version = self.u32()
        if found_version != version:
            raise FormatError(
                self.path, f'unsupported version {found_version}, expected {version}'
            )

    def u32(self) -> int:
        return _U32.unpack(self._take(4))[0]

    def u32s(self, count: int) -> Tuple[int, ...]:
        return tuple(self.u32() for _ in range(count))

    def f32(self, shape: Tuple[int, ...]) -> np.ndarray:
        """Read float32 values and return them as a float64 array."""
        count = int(np.prod(shape)) if shape else 1
        raw = self._take(4 * count)
        return np.frombuffer(raw, dtype='<f4').astype(np.float64).reshape(shape)

    def text(self) -> str:
        length = self.u32()
        try:
            return self._take(length).decode('utf-8')
        except UnicodeDecodeError:
            raise FormatError(self.path, 'invalid UTF-8 string')

    def expect_end(self) -> None:
        if self.offset != len(self.data):
            raise FormatError(
                self.path, f'{len(self.data) - self.offset} trailing bytes'
            )
