"""Pawn advantage and win probability identities, and perspective handling.

Engine evaluations are read on the pawn scale: a pawn advantage ``c`` maps to
the win probability ``1 / (1 + 10 ** (-c / WIN_PROB_SCALE))``. Mates bypass the
identity and map straight to 0 or 1.
"""

from __future__ import annotations

import logging
import math
from dataclasses import dataclass
from enum import Enum
from typing import TYPE_CHECKING

import chess

from gambit_lab.errors import PerspectiveMismatchError, WinProbBoundaryError

if TYPE_CHECKING:
    from gambit_lab.engine.scores import EngineScore

logger = logging.getLogger(__name__)

# Pawns per decade of win odds. Read at call time so selfcheck can perturb it.
WIN_PROB_SCALE = 4.0


class WinProb(float):
    """A probability of winning, validated to lie in [0, 1]."""

    __slots__ = ()

    def __new__(cls, value: float) -> WinProb:  # noqa: PYI034
        """Create a validated win probability.

        Raises:
            ValueError: If the value lies outside [0, 1] or is NaN.
        """
        if not 0.0 <= value <= 1.0:
            msg = f"Win probability must lie in [0, 1], got {value}"
            raise ValueError(msg)
        return super().__new__(cls, value)


class Perspective(Enum):
    """Whose point of view a pawn advantage is expressed from."""

    WHITE = "white"
    BLACK = "black"
    GAMBITEER = "gambiteer"
    SIDE_TO_MOVE = "side-to-move"


@dataclass(frozen=True)
class PawnAdvantage:
    """Signed advantage in pawn units from a declared perspective.

    Attributes:
        value: Advantage in pawns; positive favors the perspective's player.
        perspective: Whose point of view ``value`` is expressed from.
    """

    value: float
    perspective: Perspective = Perspective.GAMBITEER

    def __post_init__(self) -> None:
        """Reject non-finite values."""
        if not math.isfinite(self.value):
            msg = f"Pawn advantage must be finite, got {self.value}"
            raise ValueError(msg)

    def __neg__(self) -> PawnAdvantage:
        """Flip the sign, keeping the perspective tag."""
        return PawnAdvantage(-self.value, self.perspective)


@dataclass(frozen=True)
class MateFlag:
    """A forced mate, resolved to a certain win or loss.

    Attributes:
        winning: Whether the perspective's player delivers the mate.
        moves: Mate distance in moves.
        perspective: Whose point of view ``winning`` is expressed from.
    """

    winning: bool
    moves: int
    perspective: Perspective = Perspective.GAMBITEER

    @property
    def win_probability(self) -> WinProb:
        """Return 1.0 for a mate delivered, 0.0 for a mate suffered."""
        return WinProb(1.0 if self.winning else 0.0)

    def __neg__(self) -> MateFlag:
        """Swap winner and loser."""
        return MateFlag(not self.winning, self.moves, self.perspective)

    def __str__(self) -> str:
        """Render as the tables do, e.g. "Mate in 5"."""
        return f"Mate in {self.moves}" if self.winning else f"Mated in {self.moves}"


GambiteerValue = PawnAdvantage | MateFlag


def cp_to_winprob(c: PawnAdvantage | float) -> WinProb:
    """Convert a pawn advantage to a win probability.

    Args:
        c: Pawn advantage (the scale is pawns, not centipawns).

    Returns:
        ``1 / (1 + 10 ** (-c / WIN_PROB_SCALE))``, evaluated in its tanh form so
        that large advantages saturate at 0 or 1 instead of overflowing.
    """
    value = c.value if isinstance(c, PawnAdvantage) else float(c)
    half = math.tanh(value * math.log(10.0) / (2.0 * WIN_PROB_SCALE))
    return WinProb(min(1.0, max(0.0, 0.5 * (1.0 + half))))


def winprob_to_cp(
    w: WinProb | float, perspective: Perspective = Perspective.GAMBITEER
) -> PawnAdvantage:
    """Convert a win probability back to a pawn advantage.

    Args:
        w: Win probability strictly inside (0, 1).
        perspective: Perspective tag for the result.

    Returns:
        ``WIN_PROB_SCALE * log10(w / (1 - w))``.

    Raises:
        WinProbBoundaryError: If ``w`` is 0 or 1 (mates have no finite advantage).
    """
    w = float(w)
    if not 0.0 < w < 1.0:
        msg = f"Win probability {w} has no finite pawn advantage; use a mate flag"
        raise WinProbBoundaryError(msg)
    return PawnAdvantage(WIN_PROB_SCALE * math.log10(w / (1.0 - w)), perspective)


def win_probability_of(value: GambiteerValue) -> WinProb:
    """Return the win probability of a pawn advantage or mate flag."""
    if isinstance(value, MateFlag):
        return value.win_probability
    return cp_to_winprob(value)


def flip_perspective(value: GambiteerValue) -> GambiteerValue:
    """Express a value from the other player's point of view."""
    return -value


def to_gambiteer_perspective(
    s: EngineScore, gambiteer: chess.Color, side_to_move: chess.Color
) -> GambiteerValue:
    """Normalize a side-to-move engine score to the gambiteer's perspective.

    Args:
        s: Engine score, positive when the side to move stands better.
        gambiteer: Color of the player offering the gambit.
        side_to_move: Color to move in the scored position.

    Returns:
        A pawn advantage positive for the gambiteer, or a mate flag.
    """
    sign = 1 if gambiteer == side_to_move else -1
    if s.mate is not None:
        return MateFlag(winning=(s.mate > 0) == (sign > 0), moves=abs(s.mate))
    return PawnAdvantage(sign * s.pawns, Perspective.GAMBITEER)


def same_perspective(a: PawnAdvantage, b: PawnAdvantage) -> Perspective:
    """Return the shared perspective of two advantages.

    Raises:
        PerspectiveMismatchError: If the perspectives differ.
    """
    if a.perspective != b.perspective:
        msg = f"Cannot compare {a.perspective.value} and {b.perspective.value} values"
        raise PerspectiveMismatchError(msg)
    return a.perspective
