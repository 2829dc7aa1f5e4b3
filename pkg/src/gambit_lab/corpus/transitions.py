"""Empirical transition distributions at a branch position."""

from __future__ import annotations

import logging
from dataclasses import dataclass
from typing import TYPE_CHECKING

from gambit_lab.board import Move, Position, PositionKey, legal_moves, position_key
from gambit_lab.constants import DEFAULT_MIN_GAMES
from gambit_lab.errors import EmptySupportError, InsufficientDataError

if TYPE_CHECKING:
    from gambit_lab.corpus.index import CorpusIndex

logger = logging.getLogger(__name__)


@dataclass(frozen=True)
class TransitionEntry:
    """Observed frequency of one successor move.

    Attributes:
        move: The move played.
        count: Number of games that played it.
        probability: Share of the distribution's mass.
    """

    move: Move
    count: int
    probability: float


@dataclass(frozen=True)
class TransitionDistribution:
    """Distribution of human replies at a position.

    Attributes:
        key: Position key of the branch position.
        total: Sum of entry counts.
        entries: Entries ordered by count (descending), then UCI.
        provenance: Corpus id and query settings.
    """

    key: PositionKey
    total: int
    entries: tuple[TransitionEntry, ...]
    provenance: str = ""

    @property
    def moves(self) -> list[Move]:
        """Return the support in entry order."""
        return [entry.move for entry in self.entries]

    def probability(self, move: Move) -> float:
        """Return the probability of a move (0 when unobserved)."""
        return next((e.probability for e in self.entries if e.move == move), 0.0)

    def count(self, move: Move) -> int:
        """Return the count of a move (0 when unobserved)."""
        return next((e.count for e in self.entries if e.move == move), 0)


def query_transitions(
    idx: CorpusIndex,
    p: Position,
    min_games: int = DEFAULT_MIN_GAMES,
    smoothing: float = 0.0,
    corpus_id: str | None = None,
) -> TransitionDistribution:
    """Look up the observed replies at a position.

    Args:
        idx: Corpus index.
        p: Branch position.
        min_games: Fewest games that must have reached ``p``.
        smoothing: Pseudo-count added to every legal move (0 keeps raw frequencies).
        corpus_id: Corpus id for the provenance note; computed when omitted.

    Returns:
        Distribution with probability count/total per observed move.

    Raises:
        InsufficientDataError: If fewer than ``min_games`` games reached ``p``.
    """
    key = position_key(p)
    observed = idx.counters.get(key, {})
    legal = {move.uci(): move for move in legal_moves(p)}

    counts: dict[str, int] = {}
    for uci, n in observed.items():
        if uci in legal:
            counts[uci] = n
        else:
            logger.warning("Dropping %s: illegal in %s (position key collision?)", uci, p.fen())

    total = sum(counts.values())
    if total < min_games:
        msg = f"Only {total} games reach {p.fen()}; need at least {min_games}"
        raise InsufficientDataError(msg)

    if smoothing > 0:
        support = sorted(legal)
        mass = total + smoothing * len(support)
        probabilities = {uci: (counts.get(uci, 0) + smoothing) / mass for uci in support}
    else:
        probabilities = {uci: n / total for uci, n in counts.items()}

    ordered = sorted(probabilities, key=lambda uci: (-counts.get(uci, 0), uci))
    entries = tuple(
        TransitionEntry(legal[uci], counts.get(uci, 0), probabilities[uci]) for uci in ordered
    )
    provenance = (
        f"corpus {corpus_id or idx.corpus_id}; min_games={min_games}; smoothing={smoothing:g}"
    )
    return TransitionDistribution(key, total, entries, provenance)


def restrict_and_renormalize(
    d: TransitionDistribution, moves: list[Move]
) -> TransitionDistribution:
    """Restrict a distribution to some moves and rescale it to sum to 1.

    Args:
        d: The full distribution.
        moves: Moves to keep, in output order; unobserved moves get probability 0.

    Returns:
        The restricted distribution.

    Raises:
        EmptySupportError: If the kept moves carry no probability.
    """
    mass = sum(d.probability(move) for move in moves)
    if mass <= 0.0:
        kept = ", ".join(move.uci() for move in moves) or "no moves"
        msg = f"Restriction to {kept} leaves no probability mass"
        raise EmptySupportError(msg)
    entries = tuple(
        TransitionEntry(move, d.count(move), d.probability(move) / mass) for move in moves
    )
    return TransitionDistribution(
        d.key, sum(entry.count for entry in entries), entries, f"{d.provenance}; renormalized"
    )

