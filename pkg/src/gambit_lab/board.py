"""Chess rules: immutable positions, legal moves, move application and hashing.

Positions wrap a ``chess.Board`` without move history, so two positions reached
by different move orders compare equal when their state matches.
"""

from __future__ import annotations

import logging
from typing import TYPE_CHECKING, NewType

import chess
import chess.polyglot

from gambit_lab.errors import IllegalMoveError, InvalidPositionError

if TYPE_CHECKING:
    import numpy as np

logger = logging.getLogger(__name__)

PositionKey = NewType("PositionKey", int)

Move = chess.Move


class Position:
    """An immutable chess position.

    Holds piece placement, side to move, castling rights, en-passant target
    and both move clocks. Construction validates the position invariants.
    """

    __slots__ = ("_board",)

    def __init__(self, board: chess.Board) -> None:
        """Initialize from a board, dropping its move history.

        Args:
            board: Board whose current state to capture.

        Raises:
            InvalidPositionError: If the board violates a position invariant.
        """
        status = board.status()
        if status != chess.STATUS_VALID:
            msg = f"Invalid position {board.fen()}: {describe_status(status)}"
            raise InvalidPositionError(msg)
        self._board = board.copy(stack=False)

    @classmethod
    def startpos(cls) -> Position:
        """Return the standard initial position."""
        return cls(chess.Board())

    @property
    def board(self) -> chess.Board:
        """Return a mutable copy of the underlying board."""
        return self._board.copy(stack=False)

    @property
    def turn(self) -> chess.Color:
        """Return the side to move."""
        return self._board.turn

    @property
    def ep_square(self) -> chess.Square | None:
        """Return the en-passant target square, if any."""
        return self._board.ep_square

    @property
    def castling_rights(self) -> chess.Bitboard:
        """Return the castling-rook bitboard."""
        return self._board.castling_rights

    @property
    def halfmove_clock(self) -> int:
        """Return the number of plies since the last capture or pawn move."""
        return self._board.halfmove_clock

    @property
    def fullmove_number(self) -> int:
        """Return the fullmove number."""
        return self._board.fullmove_number

    def piece_at(self, square: chess.Square) -> chess.Piece | None:
        """Return the piece on a square, if any."""
        return self._board.piece_at(square)

    def fen(self) -> str:
        """Return the canonical six-field FEN of this position."""
        return self._board.fen(en_passant="fen")

    def is_check(self) -> bool:
        """Return whether the side to move is in check."""
        return self._board.is_check()

    def is_checkmate(self) -> bool:
        """Return whether the side to move is checkmated."""
        return self._board.is_checkmate()

    def is_stalemate(self) -> bool:
        """Return whether the side to move is stalemated."""
        return self._board.is_stalemate()

    def is_capture(self, move: Move) -> bool:
        """Return whether a move captures, en passant included."""
        return self._board.is_capture(move)

    def is_castling(self, move: Move) -> bool:
        """Return whether a move is a castling move."""
        return self._board.is_castling(move)

    def is_en_passant(self, move: Move) -> bool:
        """Return whether a move is an en-passant capture."""
        return self._board.is_en_passant(move)

    def is_legal(self, move: Move) -> bool:
        """Return whether a move is legal here."""
        return self._board.is_legal(move)

    def __eq__(self, other: object) -> bool:
        """Compare full state, clocks included."""
        if not isinstance(other, Position):
            return NotImplemented
        return self.fen() == other.fen()

    def __hash__(self) -> int:
        """Hash the full state."""
        return hash(self.fen())

    def __repr__(self) -> str:
        """Return a FEN-bearing representation."""
        return f"Position({self.fen()!r})"


def describe_status(status: chess.Status) -> str:
    """Describe the invariant violations of a board status.

    Args:
        status: Status flags from ``chess.Board.status``.

    Returns:
        Comma-separated lowercase flag names.
    """
    names = [
        name.removeprefix("STATUS_").lower().replace("_", " ")
        for name, flag in chess.Status.__members__.items()
        if flag and status & flag
    ]
    return ", ".join(names) or "valid"


def legal_moves(p: Position) -> list[Move]:
    """List the legal moves of a position.

    Args:
        p: The position.

    Returns:
        Legal moves in generation order; empty iff checkmate or stalemate.
    """
    return list(p._board.legal_moves)  # noqa: SLF001


def apply_move(p: Position, m: Move) -> Position:
    """Play a move and return the resulting position.

    Args:
        p: The position before the move. Left unmodified.
        m: A legal move in ``p``.

    Returns:
        The position after the move.

    Raises:
        IllegalMoveError: If the move is not legal in ``p``.
    """
    board = p.board
    if not board.is_legal(m):
        msg = f"Illegal move {m.uci()} in {p.fen()}"
        raise IllegalMoveError(msg)
    board.push(m)
    return Position(board)


def perft(p: Position, depth: int) -> int:
    """Count the leaf nodes of the legal move tree at exactly ``depth`` plies.

    Args:
        p: The root position.
        depth: Non-negative ply count.

    Returns:
        Number of leaf nodes.

    Raises:
        ValueError: If depth is negative.
    """
    if depth < 0:
        msg = f"perft depth must be >= 0, got {depth}"
        raise ValueError(msg)
    return _perft(p.board, depth)


def _perft(board: chess.Board, depth: int) -> int:
    if depth == 0:
        return 1
    if depth == 1:
        return board.legal_moves.count()
    nodes = 0
    for move in board.legal_moves:
        board.push(move)
        nodes += _perft(board, depth - 1)
        board.pop()
    return nodes


def position_key(p: Position) -> PositionKey:
    """Compute the 64-bit transposition key of a position.

    Uses the fixed polyglot Zobrist table: placement, side to move, castling
    rights and a capturable en-passant file. Move clocks are excluded.

    Args:
        p: The position.

    Returns:
        The position key.
    """
    return board_key(p._board)  # noqa: SLF001


def board_key(board: chess.Board) -> PositionKey:
    """Compute the position key of a raw board, skipping validation."""
    return PositionKey(chess.polyglot.zobrist_hash(board))


def format_key(key: PositionKey) -> str:
    """Render a position key as 16 hex digits."""
    return f"{key:016x}"


def random_playout(p: Position, plies: int, rng: np.random.Generator) -> list[Position]:
    """Play uniformly random legal moves from a position.

    Stops early at checkmate or stalemate.

    Args:
        p: Starting position.
        plies: Maximum number of moves to play.
        rng: Seeded random generator.

    Returns:
        Positions visited after each move, in order.
    """
    visited: list[Position] = []
    current = p
    for _ in range(plies):
        moves = legal_moves(current)
        if not moves:
            break
        current = apply_move(current, moves[int(rng.integers(len(moves)))])
        visited.append(current)
    return visited
