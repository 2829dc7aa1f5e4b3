"""PGN game reading and writing.

Games are split out of the byte stream line by line so each one carries the
byte offset of its first line. Movetext is parsed with ``chess.pgn``; comments,
NAGs and recursive variations are discarded and only the mainline is kept.
"""

from __future__ import annotations

import io
import logging
import re
from dataclasses import dataclass, field
from enum import Enum
from typing import TYPE_CHECKING, BinaryIO

import chess
import chess.pgn

from gambit_lab.board import Move, Position
from gambit_lab.errors import GambitLabError, PgnGameError

if TYPE_CHECKING:
    from collections.abc import Iterator

logger = logging.getLogger(__name__)

HEADER_REGEX = re.compile(r'^\[([A-Za-z0-9_]+)\s+"((?:[^"\\]|\\.)*)"\s*\]\s*$')
COMMENT_REGEX = re.compile(r"\{[^}]*\}|;[^\n]*")
TERMINATION_REGEX = re.compile(r"(1-0|0-1|1/2-1/2|\*)\s*$")


class GameResult(Enum):
    """Game outcome as given by the PGN termination marker."""

    WHITE_WIN = "1-0"
    BLACK_WIN = "0-1"
    DRAW = "1/2-1/2"
    UNKNOWN = "*"


@dataclass(frozen=True)
class GameRecord:
    """One game read from a PGN stream.

    Attributes:
        headers: Tag pairs in file order, values verbatim.
        start: Start position (from the FEN tag, or the standard one).
        moves: Mainline moves, legal from ``start``.
        result: Outcome given by the termination marker.
        offset: Byte offset of the game's first line in its stream.
    """

    headers: dict[str, str]
    start: Position
    moves: tuple[Move, ...]
    result: GameResult = GameResult.UNKNOWN
    offset: int = 0

    def boards(self) -> Iterator[tuple[chess.Board, Move]]:
        """Yield (board before the move, move) along the mainline.

        The yielded board is reused and mutated between iterations.
        """
        board = self.start.board
        for move in self.moves:
            yield board, move
            board.push(move)


@dataclass
class PgnReader:
    """Lazy single-consumer iterator of games in a PGN byte stream.

    Games that fail to parse are skipped and recorded in ``errors``.

    Attributes:
        stream: Binary PGN input.
        errors: Per-game failures seen so far, with byte offsets.
        games_read: Number of games yielded so far.
    """

    stream: BinaryIO
    errors: list[PgnGameError] = field(default_factory=list)
    games_read: int = 0

    def __iter__(self) -> Iterator[GameRecord]:
        """Yield each well-formed game in stream order."""
        for offset, text in _split_games(self.stream):
            try:
                record = _parse_game(offset, text)
            except PgnGameError as e:
                logger.warning("Skipping PGN game: %s", e)
                self.errors.append(e)
                continue
            self.games_read += 1
            yield record


def parse_pgn(stream: BinaryIO) -> PgnReader:
    """Open a lazy reader over a PGN byte stream.

    Args:
        stream: Binary stream with one or more games in PGN export format.

    Returns:
        A reader yielding ``GameRecord`` objects; per-game failures are
        collected in its ``errors`` list and never abort the stream.
    """
    return PgnReader(stream)


def _split_games(stream: BinaryIO) -> Iterator[tuple[int, str]]:
    """Split a PGN byte stream into (offset, text) chunks, one per game.

    A line opening with ``[`` starts a new game only after movetext and outside
    a brace comment, since comments may span lines.
    """
    lines: list[str] = []
    start = 0
    offset = 0
    saw_movetext = False
    in_comment = False
    for raw in stream:
        line = raw.decode("utf-8", errors="replace").strip()
        line_offset = offset
        offset += len(raw)
        if not in_comment and (not line or line.startswith("%")):
            continue
        if not in_comment and line.startswith("["):
            if lines and saw_movetext:
                yield start, "\n".join(lines)
                lines, saw_movetext = [], False
            if not lines:
                start = line_offset
        else:
            if not lines:
                start = line_offset
            saw_movetext = True
            in_comment = _comment_open_after(line, in_comment=in_comment)
        lines.append(line)
    if lines:
        yield start, "\n".join(lines)


def _comment_open_after(line: str, *, in_comment: bool) -> bool:
    """Return whether a brace comment is still open at the end of a movetext line."""
    for char in line:
        if in_comment:
            in_comment = char != "}"
        elif char == "{":
            in_comment = True
        elif char == ";":
            break
    return in_comment


def _split_header_block(text: str) -> tuple[list[str], str]:
    """Split a game chunk into its leading tag lines and the movetext after them."""
    lines = text.splitlines()
    count = 0
    while count < len(lines) and lines[count].startswith("["):
        count += 1
    return lines[:count], "\n".join(lines[count:])


def _parse_headers(tag_lines: list[str]) -> dict[str, str]:
    headers: dict[str, str] = {}
    for line in tag_lines:
        match = HEADER_REGEX.match(line)
        if match:
            headers[match.group(1)] = re.sub(r"\\(.)", r"\1", match.group(2))
    return headers


def _parse_game(offset: int, text: str) -> GameRecord:
    """Parse one game chunk.

    Raises:
        PgnGameError: If the game has parse errors or no termination marker.
    """
    tag_lines, movetext = _split_header_block(text)
    termination = TERMINATION_REGEX.search(COMMENT_REGEX.sub(" ", movetext))
    if termination is None:
        raise PgnGameError(offset, "missing termination marker (truncated game?)")

    game = chess.pgn.read_game(io.StringIO(text))
    if game is None:
        raise PgnGameError(offset, "no game found")
    if game.errors:
        raise PgnGameError(offset, "; ".join(str(e) for e in game.errors))

    try:
        start = Position(game.board())
    except GambitLabError as e:
        raise PgnGameError(offset, str(e)) from e
    except ValueError as e:
        raise PgnGameError(offset, f"bad FEN tag: {e}") from e

    return GameRecord(
        headers=_parse_headers(tag_lines),
        start=start,
        moves=tuple(game.mainline_moves()),
        result=GameResult(termination.group(1)),
        offset=offset,
    )


def render_pgn(record: GameRecord) -> str:
    """Render a game in PGN export format.

    Args:
        record: The game to render.

    Returns:
        PGN text whose ``Result`` tag matches the termination marker.
    """
    headers = dict(record.headers)
    headers["Result"] = record.result.value
    game = chess.pgn.Game(headers=headers)
    if record.start != Position.startpos():
        game.setup(record.start.board)
    node: chess.pgn.GameNode = game
    for move in record.moves:
        node = node.add_variation(move)
    exporter = chess.pgn.StringExporter(headers=True, variations=False, comments=False)
    return game.accept(exporter) + "\n\n"
