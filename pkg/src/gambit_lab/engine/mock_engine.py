"""Deterministic scripted UCI engine for hermetic tests.

Run as ``python -m gambit_lab.engine.mock_engine --script table.json``. The
script maps positions to side-to-move scores::

    {
      "default": {"cp": 0},
      "positions": {
        "<16-hex position key> | <FEN> | <FEN without clocks>": {"cp": 20},
        "...": {"mate": 5, "best": "e1g1"}
      }
    }

Responses are a pure function of the position and the ``go`` limits. For
``multipv k`` the mock reports the scripted line first, followed by the other
legal moves in sorted UCI order, each 10 centipawns worse than the one before.
With ``--mute`` the mock never answers ``uci``.
"""

from __future__ import annotations

import argparse
import json
import logging
import sys
from pathlib import Path
from typing import IO, TypedDict

import chess
import chess.polyglot

from gambit_lab.constants import MOCK_ENGINE_NAME

logger = logging.getLogger(__name__)


class ScriptEntry(TypedDict, total=False):
    """Scripted evaluation of one position.

    Attributes:
        cp: Side-to-move score in centipawns.
        mate: Signed mate distance in moves.
        best: UCI of the first move of the best line.
    """

    cp: int
    mate: int
    best: str


class MockEngine:
    """State machine answering UCI commands from a score table."""

    def __init__(self, script: dict[str, object], out: IO[str], *, mute: bool = False) -> None:
        """Initialize the engine.

        Args:
            script: Parsed script with "positions" and optional "default".
            out: Stream receiving engine output.
            mute: Never answer "uci" (simulates a hung engine).
        """
        positions = script.get("positions", {})
        if not isinstance(positions, dict):
            positions = {}
        self.positions: dict[str, ScriptEntry] = dict(positions)
        default = script.get("default", {"cp": 0})
        if not isinstance(default, dict):
            default = {"cp": 0}
        self.default: ScriptEntry = default  # type: ignore[assignment]
        self.out = out
        self.mute = mute
        self.options: dict[str, str] = {"MultiPV": "1", "Hash": "16"}
        self.board = chess.Board()

    def send(self, line: str) -> None:
        """Write one protocol line and flush."""
        self.out.write(line + "\n")
        self.out.flush()

    def handle(self, line: str) -> bool:
        """Handle one command line.

        Args:
            line: The command, without trailing newline.

        Returns:
            False once "quit" has been received.
        """
        tokens = line.split()
        if not tokens:
            return True
        command = tokens[0]
        if command == "uci":
            if not self.mute:
                self.send(f"id name {MOCK_ENGINE_NAME}")
                self.send("id author gambit-lab")
                self.send("option name MultiPV type spin default 1 min 1 max 500")
                self.send("option name Hash type spin default 16 min 1 max 1024")
                self.send("uciok")
        elif command == "isready":
            self.send("readyok")
        elif command == "setoption":
            self._setoption(tokens[1:])
        elif command == "ucinewgame":
            self.board = chess.Board()
        elif command == "position":
            self._position(tokens[1:])
        elif command == "go":
            self._go(tokens[1:])
        elif command == "quit":
            return False
        return True

    def _setoption(self, tokens: list[str]) -> None:
        if "name" not in tokens:
            return
        name_start = tokens.index("name") + 1
        if "value" in tokens:
            value_at = tokens.index("value")
            name = " ".join(tokens[name_start:value_at])
            value = " ".join(tokens[value_at + 1 :])
        else:
            name, value = " ".join(tokens[name_start:]), ""
        self.options[name] = value

    def _position(self, tokens: list[str]) -> None:
        if not tokens:
            return
        moves: list[str] = []
        if "moves" in tokens:
            at = tokens.index("moves")
            moves, tokens = tokens[at + 1 :], tokens[:at]
        if tokens[0] == "startpos":
            board = chess.Board()
        else:
            board = chess.Board(" ".join(tokens[1:]))
        for uci in moves:
            board.push_uci(uci)
        self.board = board

    def lookup(self, board: chess.Board) -> ScriptEntry:
        """Find the scripted entry for a position, or the default."""
        candidates = (
            f"{chess.polyglot.zobrist_hash(board):016x}",
            board.fen(en_passant="fen"),
            board.fen(),
            " ".join(board.fen(en_passant="fen").split()[:4]),
            " ".join(board.fen().split()[:4]),
        )
        for candidate in candidates:
            if candidate in self.positions:
                return self.positions[candidate]
        return self.default

    def _go(self, tokens: list[str]) -> None:
        board = self.board
        depth = int(tokens[tokens.index("depth") + 1]) if "depth" in tokens else 1
        if board.is_checkmate():
            self.send("info depth 0 score mate 0")
            self.send("bestmove (none)")
            return
        if board.is_stalemate():
            self.send("info depth 0 score cp 0")
            self.send("bestmove (none)")
            return

        entry = self.lookup(board)
        ordered = sorted(move.uci() for move in board.legal_moves)
        best = entry.get("best")
        if best in ordered:
            ordered.remove(best)
            ordered.insert(0, best)
        multipv = max(1, int(self.options.get("MultiPV", "1") or 1))
        for rank, uci in enumerate(ordered[:multipv], start=1):
            if rank == 1 and "mate" in entry:
                score = f"mate {entry['mate']}"
            else:
                score = f"cp {entry.get('cp', 0) - 10 * (rank - 1)}"
            self.send(
                f"info depth {depth} seldepth {depth} multipv {rank} score {score} "
                f"nodes {depth * 1000} pv {uci}"
            )
        self.send(f"bestmove {ordered[0]}")


def run(script_path: Path | None, stdin: IO[str], stdout: IO[str], *, mute: bool = False) -> None:
    """Serve UCI commands until "quit" or end of input.

    Args:
        script_path: JSON score table, or None for an all-default engine.
        stdin: Command stream.
        stdout: Response stream.
        mute: Never answer "uci".
    """
    script = json.loads(script_path.read_text()) if script_path is not None else {}
    engine = MockEngine(script, stdout, mute=mute)
    for line in stdin:
        if not engine.handle(line.strip()):
            break


def main(argv: list[str] | None = None) -> None:
    """Entry point for ``python -m gambit_lab.engine.mock_engine``."""
    parser = argparse.ArgumentParser(description="Scripted UCI engine for tests.")
    parser.add_argument("--script", type=Path, default=None, help="JSON score table")
    parser.add_argument("--mute", action="store_true", help="never answer the handshake")
    args = parser.parse_args(argv)
    run(args.script, sys.stdin, sys.stdout, mute=args.mute)


if __name__ == "__main__":
    main()
