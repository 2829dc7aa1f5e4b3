"""Engine score, search limit and analysis result types."""

from __future__ import annotations

from dataclasses import dataclass

import chess
import chess.engine

from gambit_lab.constants import DEFAULT_DEPTH, DEFAULT_MULTIPV


@dataclass(frozen=True)
class EngineScore:
    """An engine evaluation from the side to move's perspective.

    Exactly one of ``pawns`` and ``mate`` is set.

    Attributes:
        pawns: Advantage in pawn units (engine centipawns divided by 100).
        mate: Signed mate distance in moves; positive when the side to move mates.
    """

    pawns: float | None = None
    mate: int | None = None

    def __post_init__(self) -> None:
        """Check that exactly one variant is populated."""
        if (self.pawns is None) == (self.mate is None):
            msg = f"EngineScore needs exactly one of pawns/mate, got {self.pawns}/{self.mate}"
            raise ValueError(msg)
        if self.mate == 0:
            msg = "Mate distance must be nonzero"
            raise ValueError(msg)

    @classmethod
    def from_chess(cls, score: chess.engine.Score) -> EngineScore:
        """Convert a python-chess relative score.

        A side to move that is already mated (``mate 0``) becomes mate in -1.
        """
        mate = score.mate()
        if mate is not None:
            return cls(mate=mate if mate != 0 else -1)
        return cls(pawns=score.score() / 100.0)

    @property
    def is_mate(self) -> bool:
        """Return whether this is a forced-mate score."""
        return self.mate is not None

    def flip(self) -> EngineScore:
        """Return the same evaluation from the other side's perspective."""
        if self.mate is not None:
            return EngineScore(mate=-self.mate)
        return EngineScore(pawns=-self.pawns if self.pawns else 0.0)

    def __str__(self) -> str:
        """Render as "+0.20" or "#-3"."""
        if self.mate is not None:
            return f"#{self.mate}"
        return f"{self.pawns:+.2f}"


@dataclass(frozen=True)
class SearchLimits:
    """Limits for one engine search.

    Attributes:
        depth: Search depth in plies.
        movetime_ms: Search time in milliseconds.
        multipv: Number of principal variations to report.
        timeout_s: Wall-clock limit for the whole search, if any.
    """

    depth: int | None = DEFAULT_DEPTH
    movetime_ms: int | None = None
    multipv: int = DEFAULT_MULTIPV
    timeout_s: float | None = None

    def __post_init__(self) -> None:
        """Validate the limits before any engine I/O happens."""
        if self.depth is None and self.movetime_ms is None:
            msg = "SearchLimits needs a depth or a movetime"
            raise ValueError(msg)
        if self.multipv < 1:
            msg = f"multipv must be >= 1, got {self.multipv}"
            raise ValueError(msg)

    def to_chess(self) -> chess.engine.Limit:
        """Convert to a python-chess limit."""
        time = None if self.movetime_ms is None else self.movetime_ms / 1000.0
        return chess.engine.Limit(depth=self.depth, time=time)


@dataclass(frozen=True)
class AnalysisEntry:
    """One principal variation of a search.

    Attributes:
        rank: 1-based MultiPV rank.
        move: First move of the line.
        score: Score of the line, side to move's perspective.
        pv: Principal variation, starting with ``move``.
    """

    rank: int
    move: chess.Move
    score: EngineScore
    pv: tuple[chess.Move, ...] = ()


@dataclass(frozen=True)
class AnalysisResult:
    """Outcome of one search.

    Attributes:
        entries: Lines sorted by rank; rank 1 is the position's value estimate.
        depth: Deepest completed depth reported.
        engine: Engine identity text.
    """

    entries: tuple[AnalysisEntry, ...]
    depth: int
    engine: str

    @property
    def value(self) -> EngineScore:
        """Return the rank-1 score."""
        return self.entries[0].score
