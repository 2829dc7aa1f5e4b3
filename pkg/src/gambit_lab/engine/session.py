"""UCI engine sessions over python-chess.

One session owns one engine process and runs at most one search at a time.
Scores leave the bridge in pawn units from the side to move's perspective.
"""

from __future__ import annotations

import asyncio
import logging
import shlex
import threading
from dataclasses import dataclass, field
from typing import TYPE_CHECKING

import chess
import chess.engine

from gambit_lab.board import Move, Position, apply_move
from gambit_lab.constants import DEFAULT_HANDSHAKE_TIMEOUT, DEFAULT_HASH_MB
from gambit_lab.engine.scores import AnalysisEntry, AnalysisResult, EngineScore, SearchLimits
from gambit_lab.errors import (
    EngineError,
    EngineLaunchError,
    HandshakeTimeoutError,
    ProtocolViolationError,
    SearchTimeoutError,
    SessionBusyError,
    SessionDeadError,
)

if TYPE_CHECKING:
    from types import TracebackType

logger = logging.getLogger(__name__)


@dataclass(frozen=True)
class EngineOptions:
    """Options applied right after the handshake.

    Attributes:
        hash_mb: Transposition table size, sent when the engine offers "Hash".
        handshake_timeout: Seconds allowed for uci/uciok and isready/readyok.
        extra: Further UCI options passed through verbatim.
    """

    hash_mb: int = DEFAULT_HASH_MB
    handshake_timeout: float = DEFAULT_HANDSHAKE_TIMEOUT
    extra: dict[str, str | int | bool] = field(default_factory=dict)


class EngineSession:
    """A handshaken UCI engine process.

    Sessions may be handed between threads but not shared: a second search
    requested while one is in flight raises ``SessionBusyError``.
    """

    def __init__(self, engine: chess.engine.SimpleEngine, command: list[str]) -> None:
        """Wrap an initialized python-chess engine.

        Args:
            engine: Engine with a completed handshake.
            command: The launch command, for messages.
        """
        self._engine = engine
        self._command = command
        self._search_lock = threading.Lock()
        self._closed = False
        self.identity = engine.id.get("name", command[0])

    def __enter__(self) -> EngineSession:
        """Return the session itself."""
        return self

    def __exit__(
        self,
        exc_type: type[BaseException] | None,
        exc_value: BaseException | None,
        traceback: TracebackType | None,
    ) -> None:
        """Close the session."""
        self.close()

    @property
    def closed(self) -> bool:
        """Return whether the session has been closed."""
        return self._closed

    def close(self) -> None:
        """Send quit and release the engine process. Idempotent."""
        if self._closed:
            return
        self._closed = True
        try:
            self._engine.quit()
        except (chess.engine.EngineError, TimeoutError):
            logger.debug("Engine %s did not quit cleanly", self.identity)
        finally:
            self._engine.close()
        logger.info("Closed engine session %s", self.identity)

    def analyse(self, board: chess.Board, limits: SearchLimits) -> list[chess.engine.InfoDict]:
        """Run one MultiPV search, holding the search lock.

        Raises:
            SessionBusyError: If another search is in flight.
            SessionDeadError: If the engine has terminated.
            SearchTimeoutError: If ``limits.timeout_s`` elapses.
            ProtocolViolationError: If the engine breaks the protocol.
        """
        if self._closed:
            msg = f"Session {self.identity} is closed"
            raise SessionDeadError(msg)
        if not self._search_lock.acquire(blocking=False):
            msg = f"Session {self.identity} already has a search in flight"
            raise SessionBusyError(msg)
        try:
            return self._analyse(board, limits)
        finally:
            self._search_lock.release()

    def _analyse(self, board: chess.Board, limits: SearchLimits) -> list[chess.engine.InfoDict]:
        limit = limits.to_chess()
        try:
            if limits.timeout_s is None:
                return self._engine.analyse(board, limit, multipv=limits.multipv)
            coro = asyncio.wait_for(
                self._engine.protocol.analyse(board, limit, multipv=limits.multipv),
                limits.timeout_s,
            )
            return asyncio.run_coroutine_threadsafe(coro, self._engine.protocol.loop).result()
        except TimeoutError as e:
            msg = f"Search on {board.fen()} exceeded {limits.timeout_s} s"
            raise SearchTimeoutError(msg) from e
        except chess.engine.EngineTerminatedError as e:
            self._closed = True
            msg = f"Engine {self.identity} terminated: {e}"
            raise SessionDeadError(msg) from e
        except chess.engine.EngineError as e:
            msg = f"Engine {self.identity} protocol error: {e}"
            raise ProtocolViolationError(msg) from e


def parse_command(command: str | list[str]) -> list[str]:
    """Split an engine launch command into argv form."""
    return shlex.split(command) if isinstance(command, str) else list(command)


def open_session(
    command: str | list[str], options: EngineOptions | None = None
) -> EngineSession:
    """Launch a UCI engine and complete the handshake.

    Sends ``uci`` and waits for ``uciok``, applies options, then confirms with
    ``isready``/``readyok``. MultiPV is set per search.

    Args:
        command: Engine executable, with arguments.
        options: Options to apply; defaults when omitted.

    Returns:
        The open session.

    Raises:
        EngineLaunchError: If the process cannot be started or dies in the handshake.
        HandshakeTimeoutError: If the engine does not answer in time.
    """
    options = options or EngineOptions()
    argv = parse_command(command)
    try:
        engine = chess.engine.SimpleEngine.popen_uci(argv, timeout=options.handshake_timeout)
    except TimeoutError as e:
        msg = f"Engine {argv} did not send uciok within {options.handshake_timeout} s"
        raise HandshakeTimeoutError(msg) from e
    except (OSError, chess.engine.EngineError) as e:
        msg = f"Could not launch engine {argv}: {e}"
        raise EngineLaunchError(msg) from e

    try:
        settings: dict[str, str | int | bool] = dict(options.extra)
        if "Hash" in engine.options:
            settings["Hash"] = options.hash_mb
        if settings:
            engine.configure(settings)
        engine.ping()
    except TimeoutError as e:
        engine.close()
        msg = f"Engine {argv} did not send readyok within {options.handshake_timeout} s"
        raise HandshakeTimeoutError(msg) from e
    except chess.engine.EngineError as e:
        engine.close()
        msg = f"Engine {argv} rejected its options: {e}"
        raise EngineLaunchError(msg) from e

    session = EngineSession(engine, argv)
    logger.info("Opened engine session %s (%s)", session.identity, " ".join(argv))
    return session


def _terminal_result(p: Position, identity: str) -> AnalysisResult | None:
    """Score checkmate and stalemate without asking the engine."""
    if p.is_checkmate():
        score = EngineScore(mate=-1)
    elif p.is_stalemate():
        score = EngineScore(pawns=0.0)
    else:
        return None
    return AnalysisResult((AnalysisEntry(1, chess.Move.null(), score),), 0, identity)


def evaluate(session: EngineSession, p: Position, limits: SearchLimits) -> AnalysisResult:
    """Search a position and collect its top lines.

    Args:
        session: Open session with no search in flight.
        p: Position to search.
        limits: Depth or movetime, and the number of lines.

    Returns:
        Lines at the deepest completed depth, sorted by rank.

    Raises:
        ProtocolViolationError: If a line comes back without a score or move.
        SearchTimeoutError: If the search exceeds its wall-clock limit.
        SessionDeadError: If the engine is gone.
        SessionBusyError: If another search is in flight.
    """
    terminal = _terminal_result(p, session.identity)
    if terminal is not None:
        return terminal

    infos = session.analyse(p.board, limits)
    entries: list[AnalysisEntry] = []
    depth = 0
    for rank, info in enumerate(infos, start=1):
        if not info:
            continue
        score = info.get("score")
        pv = info.get("pv")
        if score is None or not pv:
            msg = f"Engine {session.identity} sent line {rank} without score or pv: {info}"
            raise ProtocolViolationError(msg)
        entries.append(
            AnalysisEntry(rank, pv[0], EngineScore.from_chess(score.relative), tuple(pv))
        )
        depth = max(depth, int(info.get("depth", 0)))
    if not entries:
        msg = f"Engine {session.identity} returned no analysis for {p.fen()}"
        raise ProtocolViolationError(msg)

    logger.debug("Evaluated %s at depth %d: %s", p.fen(), depth, entries[0].score)
    return AnalysisResult(tuple(entries), depth, session.identity)


def evaluate_moves(
    session: EngineSession, p: Position, moves: list[Move], limits: SearchLimits
) -> dict[Move, EngineScore]:
    """Score candidate moves by searching each child position.

    Each child is searched independently at ``limits`` with a single line, and
    its score is flipped to the perspective of the player making the move.

    Args:
        session: Open session.
        p: Position the moves are played from.
        moves: Legal moves in ``p``.
        limits: Search limits for every child.

    Returns:
        Mover-perspective score per move, in input order.

    Raises:
        IllegalMoveError: If a move is not legal in ``p``.
        EngineError: If a child search fails; the message names the move.
    """
    child_limits = SearchLimits(
        depth=limits.depth,
        movetime_ms=limits.movetime_ms,
        multipv=1,
        timeout_s=limits.timeout_s,
    )
    scores: dict[Move, EngineScore] = {}
    for move in moves:
        child = apply_move(p, move)
        try:
            result = evaluate(session, child, child_limits)
        except EngineError as e:
            msg = f"Evaluating {move.uci()} from {p.fen()} failed: {e}"
            raise type(e)(msg) from e
        scores[move] = result.value.flip()
    return scores
