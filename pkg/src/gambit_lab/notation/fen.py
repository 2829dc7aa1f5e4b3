"""FEN parsing and rendering."""

from __future__ import annotations

import chess

from gambit_lab.board import Position, describe_status
from gambit_lab.errors import FenSemanticError, FenSyntaxError

FEN_FIELDS = 6

STARTING_FEN = chess.STARTING_FEN


def parse_fen(text: str) -> Position:
    """Parse a six-field FEN string.

    Args:
        text: The FEN string.

    Returns:
        The position it describes.

    Raises:
        FenSyntaxError: If a field is malformed or fields are missing.
        FenSemanticError: If the position violates an invariant, such as two kings
            of one color, the side not to move in check or a bad en-passant square.
    """
    fields = text.split()
    if len(fields) != FEN_FIELDS:
        msg = f"FEN needs {FEN_FIELDS} fields, got {len(fields)}: {text!r}"
        raise FenSyntaxError(msg)
    try:
        board = chess.Board(" ".join(fields))
    except ValueError as e:
        msg = f"Malformed FEN {text!r}: {e}"
        raise FenSyntaxError(msg) from e

    status = board.status()
    if status != chess.STATUS_VALID:
        msg = f"Impossible position {text!r}: {describe_status(status)}"
        raise FenSemanticError(msg)
    return Position(board)


def render_fen(p: Position) -> str:
    """Render the canonical six-field FEN of a position.

    Args:
        p: The position.

    Returns:
        FEN with the en-passant square shown after every double pawn push.
    """
    return p.fen()
