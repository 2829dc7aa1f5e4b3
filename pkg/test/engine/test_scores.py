"""Tests for engine score and limit types."""

from __future__ import annotations

import chess.engine
import pytest

from gambit_lab.engine.scores import EngineScore, SearchLimits


class TestEngineScore:
    """Tests for EngineScore."""

    def test_exactly_one_variant(self) -> None:
        """Test that a score needs exactly one of pawns and mate."""
        with pytest.raises(ValueError, match="exactly one"):
            EngineScore()
        with pytest.raises(ValueError, match="exactly one"):
            EngineScore(pawns=0.1, mate=2)

    def test_zero_mate_rejected(self) -> None:
        """Test that a mate distance of zero is rejected."""
        with pytest.raises(ValueError, match="nonzero"):
            EngineScore(mate=0)

    def test_from_centipawns(self) -> None:
        """Test conversion from python-chess centipawns to pawns."""
        assert EngineScore.from_chess(chess.engine.Cp(-256)) == EngineScore(pawns=-2.56)

    def test_from_mate(self) -> None:
        """Test conversion of mate scores, including an already-mated side."""
        assert EngineScore.from_chess(chess.engine.Mate(5)) == EngineScore(mate=5)
        assert EngineScore.from_chess(chess.engine.Mate(0)) == EngineScore(mate=-1)

    def test_flip(self) -> None:
        """Test that flipping negates pawns and mate distances."""
        assert EngineScore(pawns=0.2).flip() == EngineScore(pawns=-0.2)
        assert EngineScore(mate=-3).flip() == EngineScore(mate=3)

    def test_str(self) -> None:
        """Test the rendered form."""
        assert str(EngineScore(pawns=0.2)) == "+0.20"
        assert str(EngineScore(mate=-3)) == "#-3"


class TestSearchLimits:
    """Tests for SearchLimits."""

    def test_needs_depth_or_time(self) -> None:
        """Test that a search without depth or movetime is rejected."""
        with pytest.raises(ValueError, match="depth or a movetime"):
            SearchLimits(depth=None)

    def test_multipv_positive(self) -> None:
        """Test that multipv must be at least one."""
        with pytest.raises(ValueError, match="multipv"):
            SearchLimits(multipv=0)

    def test_to_chess(self) -> None:
        """Test conversion to a python-chess limit."""
        limit = SearchLimits(depth=None, movetime_ms=250).to_chess()
        assert limit.depth is None
        assert limit.time == 0.25
