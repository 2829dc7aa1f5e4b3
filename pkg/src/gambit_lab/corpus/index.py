"""Building, merging and persisting the corpus position index.

Index file layout::

    gambit-lab-corpus-index <version> <sha256 of body>
    {"positions": {"<16-hex key>": {"<uci>": count, ...}, ...}, "stats": {...}}

The body is canonical JSON (sorted keys, no whitespace), so equal indexes
produce identical files.
"""

from __future__ import annotations

import hashlib
import json
import logging
from collections import Counter
from dataclasses import asdict, dataclass, field
from pathlib import Path
from typing import TYPE_CHECKING, BinaryIO

from joblib import Parallel, delayed

from gambit_lab.board import PositionKey, board_key, format_key
from gambit_lab.constants import DEFAULT_MAX_PLY, INDEX_MAGIC, INDEX_VERSION
from gambit_lab.errors import CorpusReadError, IndexCorruptionError, IndexVersionError
from gambit_lab.file_utils import timeit, write_to_file
from gambit_lab.notation.pgn import parse_pgn

if TYPE_CHECKING:
    from collections.abc import Iterable, Mapping

logger = logging.getLogger(__name__)


@dataclass
class IngestStats:
    """Counts gathered while indexing.

    Attributes:
        games_read: Games parsed successfully.
        games_skipped: Games rejected by the PGN reader.
        games_filtered: Games parsed but excluded by the header filter.
        plies_indexed: Positions whose successor counter was incremented.
    """

    games_read: int = 0
    games_skipped: int = 0
    games_filtered: int = 0
    plies_indexed: int = 0

    def __add__(self, other: IngestStats) -> IngestStats:
        """Sum two sets of counts."""
        return IngestStats(
            self.games_read + other.games_read,
            self.games_skipped + other.games_skipped,
            self.games_filtered + other.games_filtered,
            self.plies_indexed + other.plies_indexed,
        )


@dataclass(frozen=True)
class HeaderFilter:
    """Simple predicate over PGN header tags.

    Attributes:
        allowed: Tag name to accepted values; a game passes when every listed
            tag is present with one of its accepted values.
    """

    allowed: Mapping[str, tuple[str, ...]] = field(default_factory=dict)

    def __call__(self, headers: Mapping[str, str]) -> bool:
        """Return whether a game with these headers is kept."""
        return all(headers.get(tag) in values for tag, values in self.allowed.items())


@dataclass
class CorpusIndex:
    """Successor-move counts per position key.

    Attributes:
        counters: Position key to UCI move counts.
        stats: Ingestion counts.
        max_ply: Depth the corpus was indexed to.
    """

    counters: dict[PositionKey, Counter[str]] = field(default_factory=dict)
    stats: IngestStats = field(default_factory=IngestStats)
    max_ply: int = DEFAULT_MAX_PLY

    def __len__(self) -> int:
        """Return the number of indexed positions."""
        return len(self.counters)

    def __eq__(self, other: object) -> bool:
        """Compare counts, stats and depth."""
        if not isinstance(other, CorpusIndex):
            return NotImplemented
        return self.body() == other.body()

    def __hash__(self) -> int:
        """Hash the canonical body."""
        return hash(self.body())

    def add(self, key: PositionKey, uci: str) -> None:
        """Count one occurrence of a move from a position."""
        self.counters.setdefault(key, Counter())[uci] += 1

    def merged(self, other: CorpusIndex) -> CorpusIndex:
        """Return the union of two indexes, with counts and stats summed."""
        counters = {key: Counter(counts) for key, counts in self.counters.items()}
        for key, counts in other.counters.items():
            counters.setdefault(key, Counter()).update(counts)
        return CorpusIndex(counters, self.stats + other.stats, max(self.max_ply, other.max_ply))

    def body(self) -> str:
        """Return the canonical JSON body."""
        payload = {
            "max_ply": self.max_ply,
            "positions": {
                format_key(key): dict(sorted(counts.items()))
                for key, counts in sorted(self.counters.items())
            },
            "stats": asdict(self.stats),
        }
        return json.dumps(payload, sort_keys=True, separators=(",", ":"))

    @property
    def corpus_id(self) -> str:
        """Return a short content digest identifying this index."""
        return hashlib.sha256(self.body().encode("utf-8")).hexdigest()[:16]


def build_index(
    stream: BinaryIO,
    max_ply: int = DEFAULT_MAX_PLY,
    game_filter: HeaderFilter | None = None,
) -> CorpusIndex:
    """Index every mainline position of a PGN stream up to ``max_ply``.

    Args:
        stream: Binary PGN input.
        max_ply: Number of plies indexed per game.
        game_filter: Optional header predicate; games failing it are counted
            as filtered and not indexed.

    Returns:
        The index; unreadable games are counted in ``stats.games_skipped``.
    """
    index = CorpusIndex(max_ply=max_ply)
    reader = parse_pgn(stream)
    for record in reader:
        if game_filter is not None and not game_filter(record.headers):
            index.stats.games_filtered += 1
            continue
        for ply, (board, move) in enumerate(record.boards()):
            if ply >= max_ply:
                break
            index.add(board_key(board), move.uci())
            index.stats.plies_indexed += 1
    index.stats.games_read = reader.games_read
    index.stats.games_skipped = len(reader.errors)
    logger.debug(
        "Indexed %d games (%d skipped), %d plies",
        index.stats.games_read,
        index.stats.games_skipped,
        index.stats.plies_indexed,
    )
    return index


def index_file(path: Path, max_ply: int, game_filter: HeaderFilter | None = None) -> CorpusIndex:
    """Index one PGN file.

    Raises:
        CorpusReadError: If the file cannot be opened or read.
    """
    try:
        with path.open("rb") as stream:
            index = build_index(stream, max_ply, game_filter)
    except OSError as e:
        msg = f"Cannot read PGN file {path}: {e}"
        raise CorpusReadError(msg) from e
    logger.info("Indexed %s: %d games, %d positions", path, index.stats.games_read, len(index))
    return index


@timeit
def build_index_from_paths(
    paths: Iterable[Path],
    max_ply: int = DEFAULT_MAX_PLY,
    game_filter: HeaderFilter | None = None,
    n_jobs: int = 1,
) -> CorpusIndex:
    """Index several PGN files in parallel and merge the results.

    Args:
        paths: PGN files.
        max_ply: Number of plies indexed per game.
        game_filter: Optional header predicate.
        n_jobs: Number of parallel jobs (-1 for all CPUs).

    Returns:
        The merged index; counts do not depend on file order.

    Raises:
        CorpusReadError: If any file cannot be read.
    """
    paths = list(paths)
    parts = Parallel(n_jobs=n_jobs)(delayed(index_file)(p, max_ply, game_filter) for p in paths)
    index = CorpusIndex(max_ply=max_ply)
    for part in parts:
        index = index.merged(part)
    return index


def save_index(index: CorpusIndex, path: Path) -> None:
    """Atomically write an index with its version and checksum header."""
    body = index.body()
    digest = hashlib.sha256(body.encode("utf-8")).hexdigest()
    write_to_file(path, f"{INDEX_MAGIC} {INDEX_VERSION} {digest}\n{body}\n")
    logger.info("Saved corpus index (%d positions) to %s", len(index), path)


def load_index(path: Path) -> CorpusIndex:
    """Read an index written by ``save_index``.

    Raises:
        CorpusReadError: If the file cannot be read.
        IndexVersionError: If the file has another format version.
        IndexCorruptionError: If the header, checksum or body is invalid.
    """
    try:
        text = Path(path).read_text(encoding="utf-8")
    except (OSError, UnicodeDecodeError) as e:
        msg = f"Cannot read corpus index {path}: {e}"
        raise CorpusReadError(msg) from e

    header, _, body = text.partition("\n")
    fields = header.split()
    if len(fields) != 3 or fields[0] != INDEX_MAGIC:  # noqa: PLR2004
        msg = f"{path} is not a corpus index (header {header[:60]!r})"
        raise IndexCorruptionError(msg)
    if fields[1] != str(INDEX_VERSION):
        msg = f"{path} has index version {fields[1]}, expected {INDEX_VERSION}"
        raise IndexVersionError(msg)
    body = body.rstrip("\n")
    if hashlib.sha256(body.encode("utf-8")).hexdigest() != fields[2]:
        msg = f"{path} failed its checksum (truncated or modified)"
        raise IndexCorruptionError(msg)

    try:
        payload = json.loads(body)
        counters = {
            PositionKey(int(key, 16)): Counter({uci: int(n) for uci, n in counts.items()})
            for key, counts in payload["positions"].items()
        }
        index = CorpusIndex(counters, IngestStats(**payload["stats"]), int(payload["max_ply"]))
    except (ValueError, KeyError, TypeError) as e:
        msg = f"{path} has an undecodable body: {e}"
        raise IndexCorruptionError(msg) from e
    logger.info("Loaded corpus index %s (%d positions)", path, len(index))
    return index
