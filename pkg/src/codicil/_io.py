from __future__ import annotations

import contextlib
import io
import os
from typing import IO, Iterator, Union

Source = Union[str, os.PathLike, IO]


class FormatError(ValueError):
    """Malformed input file. ``line`` is 1-based when known."""

    def __init__(self, message: str, line: int | None = None, path: str | None = None):
        self.line = line
        self.path = path
        where = [path] if path else []
        if line is not None:
            where.append(f"line {line}")
        super().__init__(f"{', '.join(where)}: {message}" if where else message)


def source_name(source: Source) -> str | None:
    if isinstance(source, (str, os.PathLike)):
        return os.fspath(source)
    return getattr(source, "name", None)


@contextlib.contextmanager
def open_text(source: Source) -> Iterator[IO[str]]:
    """Yield a text stream for a path, a text stream, or a byte stream."""
    if isinstance(source, (str, os.PathLike)):
        with open(source, "r", encoding="utf-8") as fh:
            yield fh
    elif isinstance(source, io.TextIOBase):
        yield source
    else:
        wrapper = io.TextIOWrapper(source, encoding="utf-8")
        try:
            yield wrapper
        finally:
            wrapper.detach()


@contextlib.contextmanager
def open_sink(sink: Source) -> Iterator[IO[str]]:
    if isinstance(sink, (str, os.PathLike)):
        with open(sink, "w", encoding="utf-8", newline="\n") as fh:
            yield fh
    elif isinstance(sink, io.TextIOBase):
        yield sink
    else:
        wrapper = io.TextIOWrapper(sink, encoding="utf-8", newline="\n")
        try:
            yield wrapper
        finally:
            wrapper.flush()
            wrapper.detach()
