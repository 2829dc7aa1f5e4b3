"""Persistent evaluation cache and a lazily-launched cached evaluator.

The cache file is a CSV with one row per searched position::

    key,depth,movetime,engine,kind,value,fen
    463b96181691fc9c,20,0,mock-oracle,cp,20,rnbqkbnr/pppppppp/8/8/8/8/PPPPPPPP/RNBQKBNR w KQkq - 0 1

``key`` is the 16-hex position key, ``kind`` is ``cp`` (centipawns, side to
move) or ``mate`` (signed moves, side to move). ``depth`` and ``movetime``
(milliseconds) are the search limits, 0 when unset. Rows are unique per
(key, depth, movetime, engine) and written sorted, so identical content gives
identical bytes.
"""

from __future__ import annotations

import logging
import threading
from typing import TYPE_CHECKING

import pandas as pd

from gambit_lab.board import Move, Position, PositionKey, apply_move, format_key, position_key
from gambit_lab.constants import CACHE_COLUMNS
from gambit_lab.engine.scores import EngineScore, SearchLimits
from gambit_lab.engine.session import (
    EngineOptions,
    EngineSession,
    evaluate,
    evaluate_moves,
    open_session,
)
from gambit_lab.errors import CacheMissError, EngineError
from gambit_lab.file_utils import write_to_file

if TYPE_CHECKING:
    from pathlib import Path
    from types import TracebackType

logger = logging.getLogger(__name__)

CacheKey = tuple[PositionKey, int, int, str]


class EvaluationCache:
    """Side-to-move scores keyed by position key, search limits and engine identity."""

    def __init__(self, path: Path | None = None) -> None:
        """Initialize the cache, loading ``path`` when it exists.

        Args:
            path: CSV file backing the cache, or None for an in-memory cache.
        """
        self.path = path
        self._entries: dict[CacheKey, tuple[EngineScore, str]] = {}
        self._lock = threading.Lock()
        self._dirty = False
        if path is not None and path.exists():
            self._load(path)

    def __len__(self) -> int:
        """Return the number of cached evaluations."""
        return len(self._entries)

    def _load(self, path: Path) -> None:
        try:
            df = pd.read_csv(path, dtype={"key": str, "engine": str, "kind": str, "fen": str})
        except (OSError, pd.errors.ParserError, pd.errors.EmptyDataError) as e:
            msg = f"Could not read evaluation cache {path}: {e}"
            raise EngineError(msg) from e
        missing = set(CACHE_COLUMNS) - set(df.columns)
        if missing:
            msg = f"Evaluation cache {path} lacks columns {sorted(missing)}"
            raise EngineError(msg)
        for row in df.itertuples(index=False):
            value = int(row.value)
            if row.kind == "mate":
                score = EngineScore(mate=value)
            else:
                score = EngineScore(pawns=value / 100)
            key = (
                PositionKey(int(row.key, 16)),
                int(row.depth),
                int(row.movetime),
                str(row.engine),
            )
            self._entries[key] = (score, str(row.fen))
        logger.info("Loaded %d cached evaluations from %s", len(self._entries), path)

    def get(
        self, p: Position, depth: int, engine: str, movetime_ms: int = 0
    ) -> EngineScore | None:
        """Return the cached side-to-move score of a position, if present."""
        with self._lock:
            hit = self._entries.get((position_key(p), depth, movetime_ms, engine))
        return None if hit is None else hit[0]

    def put(
        self, p: Position, depth: int, engine: str, score: EngineScore, movetime_ms: int = 0
    ) -> None:
        """Store the side-to-move score of a position."""
        with self._lock:
            self._entries[(position_key(p), depth, movetime_ms, engine)] = (score, p.fen())
            self._dirty = True

    def to_frame(self) -> pd.DataFrame:
        """Return the cache as a sorted DataFrame in file layout."""
        with self._lock:
            rows = [
                {
                    "key": format_key(key),
                    "depth": depth,
                    "movetime": movetime_ms,
                    "engine": engine,
                    "kind": "mate" if score.mate is not None else "cp",
                    "value": score.mate if score.mate is not None else round(score.pawns * 100),
                    "fen": fen,
                }
                for (key, depth, movetime_ms, engine), (score, fen) in self._entries.items()
            ]
        df = pd.DataFrame(rows, columns=list(CACHE_COLUMNS))
        df = df.sort_values(["key", "depth", "movetime", "engine"], kind="stable")
        return df.reset_index(drop=True)

    def save(self, path: Path | None = None) -> None:
        """Atomically write the cache if it changed.

        Args:
            path: Target file; defaults to the file the cache was opened with.
        """
        target = path or self.path
        if target is None or (not self._dirty and target == self.path and target.exists()):
            return
        write_to_file(target, self.to_frame().to_csv(index=False, lineterminator="\n"))
        self._dirty = False
        logger.info("Saved %d cached evaluations to %s", len(self._entries), target)


class CachedEvaluator:
    """Evaluates positions through the cache, launching the engine on a miss.

    Cache entries are filed under ``identity``, the configured engine name, so
    cache-complete runs work without any engine installed.
    """

    def __init__(
        self,
        command: str | list[str] | None,
        identity: str,
        limits: SearchLimits,
        cache: EvaluationCache | None = None,
        options: EngineOptions | None = None,
    ) -> None:
        """Initialize the evaluator.

        Args:
            command: Engine launch command, or None for cache-only operation.
            identity: Engine name recorded in the cache and in reports.
            limits: Search limits; depth and movetime are part of the cache key.
            cache: Cache to read and fill; a fresh in-memory cache by default.
            options: Engine options used when the engine is launched.
        """
        self.command = command
        self.identity = identity
        self.limits = limits
        self.cache = cache if cache is not None else EvaluationCache()
        self.options = options
        self._session: EngineSession | None = None
        self.searches = 0

    @property
    def depth(self) -> int:
        """Return the depth under which results are cached (0 without a depth limit)."""
        return self.limits.depth or 0

    @property
    def movetime_ms(self) -> int:
        """Return the movetime under which results are cached (0 without a time limit)."""
        return self.limits.movetime_ms or 0

    def __enter__(self) -> CachedEvaluator:
        """Return the evaluator itself."""
        return self

    def __exit__(
        self,
        exc_type: type[BaseException] | None,
        exc_value: BaseException | None,
        traceback: TracebackType | None,
    ) -> None:
        """Close the engine session, if one was opened."""
        self.close()

    def close(self) -> None:
        """Close the engine session, if one was opened."""
        if self._session is not None:
            self._session.close()
            self._session = None

    def _require_session(self, p: Position) -> EngineSession:
        if self._session is None:
            if self.command is None:
                msg = f"No cached evaluation for {p.fen()} and no engine configured"
                raise CacheMissError(msg)
            self._session = open_session(self.command, self.options)
            if self._session.identity != self.identity:
                logger.warning(
                    "Engine reports identity %r; caching under configured name %r",
                    self._session.identity,
                    self.identity,
                )
        return self._session

    def score(self, p: Position) -> EngineScore:
        """Return the side-to-move value of a position (rank-1 score).

        Raises:
            CacheMissError: If the position is not cached and no engine is configured.
        """
        cached = self.cache.get(p, self.depth, self.identity, self.movetime_ms)
        if cached is not None:
            return cached
        session = self._require_session(p)
        limits = SearchLimits(
            depth=self.limits.depth,
            movetime_ms=self.limits.movetime_ms,
            multipv=1,
            timeout_s=self.limits.timeout_s,
        )
        result = evaluate(session, p, limits)
        self.searches += 1
        self.cache.put(p, self.depth, self.identity, result.value, self.movetime_ms)
        return result.value

    def evaluate_moves(self, p: Position, moves: list[Move]) -> dict[Move, EngineScore]:
        """Return mover-perspective scores of candidate moves.

        Raises:
            CacheMissError: If a child is not cached and no engine is configured.
        """
        scores: dict[Move, EngineScore] = {}
        missing: list[Move] = []
        for move in moves:
            child = apply_move(p, move)
            cached = self.cache.get(child, self.depth, self.identity, self.movetime_ms)
            if cached is None:
                missing.append(move)
            else:
                scores[move] = cached.flip()
        if missing:
            session = self._require_session(p)
            fresh = evaluate_moves(session, p, missing, self.limits)
            self.searches += len(missing)
            for move, score in fresh.items():
                child = apply_move(p, move)
                self.cache.put(child, self.depth, self.identity, score.flip(), self.movetime_ms)
                scores[move] = score
        return {move: scores[move] for move in moves}
