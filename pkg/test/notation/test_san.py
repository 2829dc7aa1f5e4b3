"""Tests for SAN parsing, rendering and movetext tokenizing."""

from __future__ import annotations

import json
from typing import TYPE_CHECKING

import chess
import pytest

from gambit_lab.board import Position, apply_move
from gambit_lab.errors import (
    MainlineParseError,
    SanAmbiguousError,
    SanNoMatchError,
    SanSyntaxError,
)
from gambit_lab.notation.fen import parse_fen, render_fen
from gambit_lab.notation.pgn import parse_pgn
from gambit_lab.notation.san import parse_mainline, parse_san, render_san, tokenize_movetext

if TYPE_CHECKING:
    from collections.abc import Iterable
    from pathlib import Path

    from gambit_lab.pipeline.config import RunConfig

HALLOWEEN_V1 = (
    "1.e4 e5 2.Nf3 Nc6 3.Nc3 Nf6 4.Nxe5 Nxe5 5.d4 Ng6 6.e5 Ng8 7.h4 Bb4 8.h5 N6e7 "
    "9.Qg4 g6 10.hxg6 Nxg6 11.Qg3 N8e7 12.Bg5"
)


class TestTokenizeMovetext:
    """Tests for tokenize_movetext."""

    def test_strips_numbers_and_result(self) -> None:
        """Test that move numbers and the result are dropped."""
        tokens = tokenize_movetext("1. e4 e5 2.Nf3 2... Nc6 1-0")
        assert tokens.tokens == ("e4", "e5", "Nf3", "Nc6")

    def test_attached_numbers(self) -> None:
        """Test move numbers written against the move."""
        assert list(tokenize_movetext("11.Bf4 11...Qb8")) == ["Bf4", "Qb8"]

    def test_rejects_non_san(self) -> None:
        """Test that a token that is not SAN is rejected."""
        with pytest.raises(SanSyntaxError, match="e9"):
            tokenize_movetext("1.e4 e9")


class TestParseSan:
    """Tests for parse_san and render_san."""

    def test_pawn_push(self) -> None:
        """Test a plain pawn move."""
        assert parse_san(Position.startpos(), "e4") == chess.Move.from_uci("e2e4")

    def test_castling_both_spellings(self) -> None:
        """Test that O-O and 0-0 denote the same move."""
        p = parse_mainline("1.e4 e5 2.Nf3 Nc6 3.Bc4 Bc5").final
        assert parse_san(p, "O-O") == parse_san(p, "0-0") == chess.Move.from_uci("e1g1")

    def test_check_suffix_accepted(self) -> None:
        """Test that a check suffix does not change the move."""
        p = parse_mainline("1.e4 f5").final
        assert parse_san(p, "Qh5+") == parse_san(p, "Qh5")

    def test_promotion(self) -> None:
        """Test promotion with and without the equals sign."""
        p = parse_fen("8/P6k/8/8/8/8/8/K7 w - - 0 1")
        assert parse_san(p, "a8=Q") == parse_san(p, "a8Q") == chess.Move.from_uci("a7a8q")

    def test_annotation_suffixes_ignored(self) -> None:
        """Test that "!" and "?" annotations do not change the move."""
        p = Position.startpos()
        e4 = chess.Move.from_uci("e2e4")
        assert parse_san(p, "e4!") == parse_san(p, "e4?!") == e4
        assert list(tokenize_movetext("1.e4!! e5?")) == ["e4!!", "e5?"]
        assert parse_mainline("1.e4! e5?").sans == ("e4", "e5")

    def test_file_disambiguation(self) -> None:
        """Test a knight move that needs a source file."""
        p = parse_fen("4k3/8/8/8/8/8/8/1N2KN2 w - - 0 1")
        assert parse_san(p, "Nbd2") == chess.Move.from_uci("b1d2")
        assert render_san(p, chess.Move.from_uci("f1g3")) == "Ng3"

    def test_ambiguous(self) -> None:
        """Test that an undisambiguated knight move is ambiguous."""
        p = parse_fen("4k3/8/8/8/8/8/8/1N2KN2 w - - 0 1")
        with pytest.raises(SanAmbiguousError):
            parse_san(p, "Nd2")

    def test_no_match(self) -> None:
        """Test that a well-formed but impossible move has no match."""
        with pytest.raises(SanNoMatchError):
            parse_san(Position.startpos(), "Nf6")

    def test_syntax(self) -> None:
        """Test that a malformed token is a syntax error."""
        with pytest.raises(SanSyntaxError):
            parse_san(Position.startpos(), "Zz9")

    def test_render_mate_suffix(self) -> None:
        """Test that rendering adds the mate suffix."""
        p = parse_mainline("1.f3 e5 2.g4").final
        assert render_san(p, chess.Move.from_uci("d8h4")) == "Qh4#"

    def test_rank_disambiguation_on_halloween_line(self) -> None:
        """Test the N6e7 rank disambiguation of the Halloween mainline."""
        line = parse_mainline(HALLOWEEN_V1)
        assert line.sans[15] == "N6e7"
        assert line.sans[21] == "N8e7"


class TestParseMainline:
    """Tests for parse_mainline."""

    def test_length_and_positions(self) -> None:
        """Test ply count and the positions before and after the line."""
        line = parse_mainline(HALLOWEEN_V1)
        assert len(line) == 23
        assert line.position_at(0) == Position.startpos()
        assert line.position_at(23) == line.final
        assert line.final.turn == chess.BLACK

    def test_error_names_the_ply(self) -> None:
        """Test that a failing token is reported with its 0-based ply."""
        with pytest.raises(MainlineParseError) as info:
            parse_mainline("1.e4 e5 2.Nf3 Nf6 3.Nxe6")
        assert info.value.ply == 4
        assert info.value.token == "Nxe6"
        assert isinstance(info.value.cause, SanNoMatchError)

    def test_canonical_sans(self) -> None:
        """Test that the parsed line carries canonical SAN with check marks."""
        line = parse_mainline("1.e4 f5 2.Qh5")
        assert line.sans == ("e4", "f5", "Qh5+")

    def test_configured_lines_end_in_golden_positions(
        self, default_config: RunConfig, fixtures_dir: Path
    ) -> None:
        """Test the final FEN of every configured line with a reply table."""
        golden = json.loads((fixtures_dir / "golden_positions.json").read_text())["mainlines"]
        assert len(golden) == 10
        for name, fen in golden.items():
            line = default_config.gambit(name).mainline
            assert render_fen(line.final) == fen, name


class TestSanRoundTrip:
    """Tests that parsing canonical SAN and rendering it again changes nothing."""

    @staticmethod
    def _assert_round_trip(start: Position, moves: Iterable[chess.Move]) -> int:
        p = start
        count = 0
        for move in moves:
            canonical = p.board.san(move)
            assert parse_san(p, canonical) == move
            assert render_san(p, parse_san(p, canonical)) == canonical
            p = apply_move(p, move)
            count += 1
        return count

    def test_fixture_games(self, fixtures_dir: Path) -> None:
        """Test every move of every readable fixture game."""
        total = 0
        for name in ("three_games.pgn", "corrupt.pgn"):
            with (fixtures_dir / name).open("rb") as stream:
                for game in parse_pgn(stream):
                    total += self._assert_round_trip(game.start, game.moves)
        assert total == 12 + 12 + 2 + 7 + 4

    def test_configured_lines(self, default_config: RunConfig) -> None:
        """Test every move of every configured line."""
        for spec in default_config.gambits:
            line = spec.mainline
            moves = [move for _, move in line.steps]
            assert self._assert_round_trip(Position.startpos(), moves) == len(line)
            assert tuple(render_san(p, m) for p, m in line.steps) == line.sans
