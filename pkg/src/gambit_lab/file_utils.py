"""File I/O utilities: timing, atomic writes and file discovery."""

from __future__ import annotations

import functools
import json
import logging
import os
import tempfile
from pathlib import Path
from time import perf_counter
from typing import TYPE_CHECKING, TypeVar

if TYPE_CHECKING:
    from collections.abc import Callable

logger = logging.getLogger(__name__)

T = TypeVar("T")


def timeit(func: Callable[..., T]) -> Callable[..., T]:
    """Decorator that logs the execution time of a function.

    Args:
        func: The function to wrap with timing.

    Returns:
        A wrapped function that logs execution time.
    """

    @functools.wraps(func)
    def wrapper(*args: object, **kwargs: object) -> T:
        """Timed wrapper that logs execution duration."""
        start = perf_counter()
        result = func(*args, **kwargs)
        end = perf_counter()
        logger.info("%s took %.2f seconds to run.", func.__name__, end - start)
        return result

    return wrapper


def write_to_file(path: str | Path, content: dict[str, object] | str | bytes | object) -> None:
    """Atomically write content to a file, creating parent directories if needed.

    The content goes to a temporary file in the target directory which then
    replaces the destination, so readers never observe a partial file.

    Args:
        path: The file path to write to.
        content: The content to write. Dicts are written as sorted JSON, bytes
            verbatim, other types are converted to strings.
    """
    path = Path(path)
    path.parent.mkdir(parents=True, exist_ok=True)
    if isinstance(content, dict):
        data = (json.dumps(content, sort_keys=True, indent=2) + "\n").encode("utf-8")
    elif isinstance(content, bytes):
        data = content
    else:
        data = str(content).encode("utf-8")

    fd, tmp_name = tempfile.mkstemp(dir=path.parent, prefix=f".{path.name}.", suffix=".tmp")
    try:
        with os.fdopen(fd, "wb") as tmp:
            tmp.write(data)
        Path(tmp_name).replace(path)
    except BaseException:
        Path(tmp_name).unlink(missing_ok=True)
        raise
    logger.debug("Wrote %d bytes to %s", len(data), path)


def get_files(directory: Path, extension: str, *, recursive: bool = False) -> list[Path]:
    """Get a sorted list of file paths matching a specified extension.

    Args:
        directory: The directory to search as a Path object.
        extension: The file extension to match as a string (without dot).
        recursive: Whether to search recursively in the directory.

    Returns:
        A sorted list of Path objects for matching files.
    """
    if recursive:
        return sorted(directory.rglob(f"*.{extension}"))
    return sorted(directory.glob(f"*.{extension}"))


def expand_paths(paths: list[Path], extension: str) -> list[Path]:
    """Expand directories in a path list into their matching files.

    Args:
        paths: Files or directories.
        extension: File extension (without dot) to collect from directories.

    Returns:
        Files in input order, directory contents sorted and recursive.
    """
    expanded: list[Path] = []
    for path in paths:
        if path.is_dir():
            expanded.extend(get_files(path, extension, recursive=True))
        else:
            expanded.append(path)
    return expanded
