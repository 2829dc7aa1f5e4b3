"""SAN move parsing, rendering and movetext tokenizing."""

from __future__ import annotations

import logging
import re
from dataclasses import dataclass, field
from typing import TYPE_CHECKING

import chess

from gambit_lab.board import Move, Position, apply_move
from gambit_lab.errors import (
    MainlineParseError,
    NotationError,
    SanAmbiguousError,
    SanNoMatchError,
    SanSyntaxError,
)

if TYPE_CHECKING:
    from collections.abc import Iterator

logger = logging.getLogger(__name__)

SAN_REGEX = re.compile(
    r"^(?:"
    r"[NBRQK][a-h]?[1-8]?x?[a-h][1-8]"
    r"|[a-h](?:x[a-h])?[1-8](?:=?[NBRQ])?"
    r"|O-O(?:-O)?|0-0(?:-0)?"
    r")[+#]?[!?]*$"
)

MOVE_NUMBER_REGEX = re.compile(r"^\d+\.(?:\.\.)?")

ANNOTATION_REGEX = re.compile(r"[!?]+$")

RESULT_TOKENS = frozenset({"1-0", "0-1", "1/2-1/2", "*"})


@dataclass(frozen=True)
class Movetext:
    """Ordered SAN tokens with move numbers and results stripped.

    Attributes:
        tokens: Syntactically valid SAN tokens.
    """

    tokens: tuple[str, ...] = ()

    def __len__(self) -> int:
        """Return the number of plies."""
        return len(self.tokens)

    def __iter__(self) -> Iterator[str]:
        """Iterate over the SAN tokens."""
        return iter(self.tokens)


@dataclass(frozen=True)
class Mainline:
    """A parsed line of play.

    Attributes:
        steps: (position before the move, move) pairs in order.
        final: Position after the last move.
        sans: Canonical SAN of each move.
    """

    steps: tuple[tuple[Position, Move], ...]
    final: Position
    sans: tuple[str, ...] = field(default=())

    def __len__(self) -> int:
        """Return the number of plies."""
        return len(self.steps)

    def position_at(self, ply: int) -> Position:
        """Return the position after ``ply`` moves (0 is the start)."""
        if ply == len(self.steps):
            return self.final
        return self.steps[ply][0]


def tokenize_movetext(text: str) -> Movetext:
    """Split movetext into SAN tokens.

    Move numbers ("1.", "12...", attached forms like "11.Bf4") and game
    results are dropped.

    Args:
        text: Movetext such as "1.e4 e5 2. Nf3 Nf6".

    Returns:
        The SAN tokens.

    Raises:
        SanSyntaxError: If a remaining token is not SAN.
    """
    tokens: list[str] = []
    for raw in text.split():
        token = MOVE_NUMBER_REGEX.sub("", raw)
        if not token or token in RESULT_TOKENS:
            continue
        if not SAN_REGEX.match(token):
            msg = f"Not a SAN token: {raw!r}"
            raise SanSyntaxError(msg)
        tokens.append(token)
    return Movetext(tuple(tokens))


def parse_san(p: Position, token: str) -> Move:
    """Resolve a SAN token to the unique legal move it denotes.

    Check and mate suffixes and annotations such as "!?" are accepted and
    ignored.

    Args:
        p: The position the move is played in.
        token: SAN token such as "N6e7" or "O-O".

    Returns:
        The matching legal move.

    Raises:
        SanSyntaxError: If the token is not SAN.
        SanAmbiguousError: If several legal moves match.
        SanNoMatchError: If no legal move matches.
    """
    if not SAN_REGEX.match(token):
        msg = f"Not a SAN token: {token!r}"
        raise SanSyntaxError(msg)
    board = p.board
    try:
        return board.parse_san(ANNOTATION_REGEX.sub("", token))
    except chess.AmbiguousMoveError as e:
        msg = f"Ambiguous SAN {token!r} in {p.fen()}"
        raise SanAmbiguousError(msg) from e
    except chess.IllegalMoveError as e:
        msg = f"No legal move matches {token!r} in {p.fen()}"
        raise SanNoMatchError(msg) from e
    except chess.InvalidMoveError as e:
        msg = f"Not a SAN token: {token!r}"
        raise SanSyntaxError(msg) from e


def render_san(p: Position, m: Move) -> str:
    """Render a legal move as canonical SAN, check suffixes included."""
    return p.board.san(m)


def parse_mainline(movetext: str | Movetext, start: Position | None = None) -> Mainline:
    """Parse a line of play from the start position.

    Args:
        movetext: Movetext string or pre-tokenized movetext.
        start: Start position; the standard initial position by default.

    Returns:
        The parsed mainline.

    Raises:
        MainlineParseError: If a token fails, tagged with its ply index.
    """
    tokens = movetext if isinstance(movetext, Movetext) else tokenize_movetext(movetext)
    position = Position.startpos() if start is None else start
    steps: list[tuple[Position, Move]] = []
    sans: list[str] = []
    for ply, token in enumerate(tokens):
        try:
            move = parse_san(position, token)
        except NotationError as e:
            raise MainlineParseError(ply, token, e) from e
        steps.append((position, move))
        sans.append(render_san(position, move))
        position = apply_move(position, move)
    logger.debug("Parsed %d-ply mainline ending in %s", len(steps), position.fen())
    return Mainline(tuple(steps), position, tuple(sans))
