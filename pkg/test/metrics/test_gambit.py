"""Tests for gambit definitions and continuation statistics."""

from __future__ import annotations

import math
from typing import TYPE_CHECKING

import chess
import pytest

from gambit_lab.errors import InvalidGambitError, PerspectiveMismatchError, UnitMismatchError
from gambit_lab.eval_model import (
    MateFlag,
    PawnAdvantage,
    Perspective,
    WinProb,
    win_probability_of,
)
from gambit_lab.metrics import gambit
from gambit_lab.metrics.gambit import (
    ContinuationRow,
    GambitSpec,
    bellman_check,
    classify_gambit,
    compute_statistics,
    format_q,
    parse_q_cell,
    q_star,
    skewness,
    volatility,
    weighted_win_prob,
)
from test.helpers.reference_reports import reference_rows

if TYPE_CHECKING:
    from gambit_lab.pipeline.config import RunConfig

STAFFORD = "1.e4 e5 2.Nf3 Nf6 3.Nxe5 Nc6 4.Nxc6 dxc6 5.d3 Bc5"


class TestGambitSpec:
    """Tests for GambitSpec validation."""

    def test_valid(self) -> None:
        """Test a well-formed gambit and its derived fields."""
        spec = GambitSpec("stafford", STAFFORD, 6, chess.BLACK, continuations=("Be2", "Nc3"))
        assert spec.k == 2
        assert spec.gambiteer_name == "black"
        assert spec.display_title == "stafford"
        assert spec.mainline.sans[5] == "Nc6"

    def test_unparsable_line(self) -> None:
        """Test that an illegal mainline is rejected."""
        with pytest.raises(InvalidGambitError, match="does not parse"):
            GambitSpec("bad", "1.e4 e5 2.Ke3", 2, chess.BLACK)

    def test_ply_outside_line(self) -> None:
        """Test that the gambit ply must lie inside the mainline."""
        with pytest.raises(InvalidGambitError, match="outside"):
            GambitSpec("bad", STAFFORD, 11, chess.BLACK)

    def test_ply_of_the_wrong_side(self) -> None:
        """Test that the gambit move must be the gambiteer's."""
        with pytest.raises(InvalidGambitError, match="not played by the gambiteer"):
            GambitSpec("bad", STAFFORD, 5, chess.BLACK)

    def test_gambiteer_to_move_at_branch(self) -> None:
        """Test that the opponent must be to move at the branch position."""
        with pytest.raises(InvalidGambitError, match="opponent must be to move"):
            GambitSpec("bad", "1.e4 e5 2.Nf3 Nf6 3.Nxe5", 4, chess.BLACK)


class TestQCells:
    """Tests for parsing and rendering Q cells."""

    def test_parse(self) -> None:
        """Test pawn and mate cells."""
        assert parse_q_cell("+1.48") == PawnAdvantage(1.48)
        assert parse_q_cell("0.00") == PawnAdvantage(0.0)
        assert parse_q_cell("#5") == MateFlag(winning=True, moves=5)
        assert parse_q_cell("#-3") == MateFlag(winning=False, moves=3)

    def test_format(self) -> None:
        """Test that cells render back to their published form."""
        for cell in ("+1.48", "-2.56", "+0.00", "#5", "#-3"):
            assert format_q(parse_q_cell(cell)) == cell


class TestContinuationRow:
    """Tests for ContinuationRow validation."""

    def test_from_q(self) -> None:
        """Test that the win probability is derived from the Q-value."""
        row = ContinuationRow.from_q("Nc3", PawnAdvantage(1.48), 0.04)
        assert row.win_probability == pytest.approx(0.7010, abs=1e-4)

    def test_probability_range(self) -> None:
        """Test that probabilities outside [0, 1] are rejected."""
        with pytest.raises(ValueError, match="outside"):
            ContinuationRow.from_q("Be2", PawnAdvantage(0.0), 1.2)

    def test_win_probability_must_match(self) -> None:
        """Test that a win probability far from its Q-value is rejected."""
        with pytest.raises(ValueError, match="does not match"):
            ContinuationRow("Be2", PawnAdvantage(0.0), 0.5, WinProb(0.9))


class TestPublishedRows:
    """Tests on the Stafford 5.d3 rows with published values."""

    @pytest.fixture
    def published(self, default_config: RunConfig) -> list[ContinuationRow]:
        """Rows with the published probabilities and win probabilities."""
        spec = default_config.gambit("stafford-v1")
        return default_config.references[spec.name].rows(spec.continuations)

    def test_weighted_win_prob(self, published: list[ContinuationRow]) -> None:
        """Test the weighted win probability of the raw rows."""
        assert weighted_win_prob(published) == pytest.approx(0.2429, abs=1e-4)

    def test_renormalized_q_star(self, published: list[ContinuationRow]) -> None:
        """Test the mean win probability once probabilities sum to one."""
        mass = sum(row.probability for row in published)
        renorm = [
            ContinuationRow(row.move, row.q, row.probability / mass, row.win_probability)
            for row in published
        ]
        assert q_star(renorm) == pytest.approx(0.2858, abs=1e-4)

    def test_derived_statistics(self, default_config: RunConfig) -> None:
        """Test statistics with win probabilities computed from the Q-values."""
        spec = default_config.gambit("stafford-v1")
        rows = reference_rows(default_config.references[spec.name], spec.continuations)
        assert q_star(rows["raw"]) == pytest.approx(0.2405, abs=1e-4)
        assert volatility(rows["raw"]) == pytest.approx(0.1852, abs=1e-4)
        assert skewness(rows["raw"]) == pytest.approx(3.1273, abs=1e-4)
        assert q_star(rows["renorm"]) == pytest.approx(0.2829, abs=1e-4)
        assert volatility(rows["renorm"]) == pytest.approx(0.1964, abs=1e-4)
        assert skewness(rows["renorm"]) == pytest.approx(2.4291, abs=1e-4)

    def test_published_table_fidelity(self, default_config: RunConfig) -> None:
        """Test that every published win probability matches its Q-value."""
        for name, reference in default_config.references.items():
            cells = zip(reference.continuation_values, reference.win_probabilities, strict=True)
            for index, (q, w) in enumerate(cells):
                tolerance = 0.02 if (name, index) == ("stafford-v2", 1) else 0.01
                assert abs(win_probability_of(q) - w) <= tolerance, (name, index)


class TestTestStatistic:
    """Tests for the gambit test statistic."""

    def test_stafford(self) -> None:
        """Test the value left on the table by the Stafford Gambit."""
        value = gambit.test_statistic(PawnAdvantage(-0.57), PawnAdvantage(-2.56))
        assert value == pytest.approx(1.99)

    def test_smith_morra(self) -> None:
        """Test the value left on the table by the Smith-Morra Gambit."""
        value = gambit.test_statistic(PawnAdvantage(0.34), PawnAdvantage(-0.32))
        assert value == pytest.approx(0.66)

    def test_win_probabilities(self) -> None:
        """Test the statistic in win-probability units."""
        assert gambit.test_statistic(WinProb(0.6), WinProb(0.45)) == pytest.approx(0.15)

    def test_unit_mismatch(self) -> None:
        """Test that pawns and win probabilities cannot be mixed."""
        with pytest.raises(UnitMismatchError):
            gambit.test_statistic(PawnAdvantage(0.3), WinProb(0.5))

    def test_perspective_mismatch(self) -> None:
        """Test that perspectives must agree."""
        with pytest.raises(PerspectiveMismatchError):
            gambit.test_statistic(PawnAdvantage(0.3, Perspective.WHITE), PawnAdvantage(0.1))


class TestClassifyGambit:
    """Tests for classify_gambit."""

    def test_stafford_is_loose_gambit(self) -> None:
        """Test that Stafford 5.d3 is a gambit but not a strict one."""
        qs = [parse_q_cell(c) for c in ("-2.56", "+1.48", "+6.20", "-1.74", "-0.87")]
        result = classify_gambit(PawnAdvantage(-2.56), qs)
        assert result.is_gambit
        assert not result.strict
        assert result.label == "gambit"

    def test_strict(self) -> None:
        """Test a gambit where only the best reply refutes it."""
        assert classify_gambit(-1.0, [-0.5, 0.3, 0.4]).strict

    def test_sound_move_is_not_a_gambit(self) -> None:
        """Test that a move with a positive Q-value is not a gambit."""
        result = classify_gambit(0.39, [0.5, 1.0])
        assert not result.is_gambit
        assert result.label == "non-gambit"

    def test_mate_continuation(self) -> None:
        """Test that a mating continuation counts as positive."""
        assert classify_gambit(-1.93, [MateFlag(winning=True, moves=5), -0.41]).is_gambit


class TestBellmanCheck:
    """Tests for bellman_check."""

    def test_violation(self) -> None:
        """Test the drop from the pre-gambit value to the branch value."""
        check = bellman_check(PawnAdvantage(-0.57), PawnAdvantage(-2.55))
        assert not check.consistent
        assert check.gap == pytest.approx(1.98)
        assert check.label == "violated"

    def test_consistent(self) -> None:
        """Test that a non-decreasing value is consistent."""
        assert bellman_check(0.1, 0.4) == gambit.BellmanCheck(consistent=True, gap=0.0)

    def test_unit_mismatch(self) -> None:
        """Test that the check needs values in the same units."""
        with pytest.raises(UnitMismatchError):
            bellman_check(PawnAdvantage(0.1), 0.2)


class TestComputeStatistics:
    """Tests for compute_statistics."""

    def test_pawn_moments(self) -> None:
        """Test the pawn-unit moments alongside the win-probability ones."""
        rows = [
            ContinuationRow.from_q("a", PawnAdvantage(1.0), 0.5),
            ContinuationRow.from_q("b", PawnAdvantage(-1.0), 0.5),
        ]
        stats = compute_statistics(rows, "renorm")
        assert stats.mode == "renorm"
        assert stats.pawn_mean == pytest.approx(0.0)
        assert stats.pawn_volatility == pytest.approx(1.0)
        assert stats.q_star == pytest.approx(0.5)
        assert stats.skewness == pytest.approx(0.0, abs=1e-12)

    def test_mate_leaves_pawn_moments_undefined(self) -> None:
        """Test that a mate row makes pawn moments NaN but keeps the rest."""
        rows = [
            ContinuationRow.from_q("a", MateFlag(winning=True, moves=5), 0.5),
            ContinuationRow.from_q("b", PawnAdvantage(0.0), 0.5),
        ]
        stats = compute_statistics(rows, "raw")
        assert math.isnan(stats.pawn_mean)
        assert stats.q_star == pytest.approx(0.75)
