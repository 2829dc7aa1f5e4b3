"""Tests for ranking and the cross-gambit summary."""

from __future__ import annotations

import math
from typing import TYPE_CHECKING

import pytest

from gambit_lab.errors import EmptyRowsError
from gambit_lab.metrics.ranking import RankKey, aggregate_summary, rank_gambits, rank_value
from test.helpers.reference_reports import reference_reports

if TYPE_CHECKING:
    from gambit_lab.metrics.gambit import GambitReport
    from gambit_lab.pipeline.config import RunConfig

WITH_CONTINUATIONS = 9


@pytest.fixture(scope="module")
def reports(default_config: RunConfig) -> list[GambitReport]:
    """Reports for every configured gambit, built from the published values."""
    return reference_reports(default_config)


def _names(reports: list[GambitReport]) -> list[str]:
    return [report.name for report in reports]


class TestRankGambits:
    """Tests for rank_gambits."""

    def test_initial_q_with_name_ties(self, reports: list[GambitReport]) -> None:
        """Test the initial-Q order, equal values ordered by name."""
        assert _names(rank_gambits(reports, "initial-q")) == [
            "stafford-v1",
            "stafford-v2",
            "halloween-v1",
            "halloween-v2",
            "reverse-stafford",
            "kings-gambit",
            "budapest-gambit",
            "blackmar-diemer",
            "danish-v1",
            "danish-v2",
            "goring-gambit",
            "smith-morra-v1",
            "smith-morra-v2",
            "evans-gambit",
            "queens-gambit",
        ]

    def test_skew(self, reports: list[GambitReport]) -> None:
        """Test the renormalized skewness order; lines without rows come last."""
        ranked = _names(rank_gambits(reports, RankKey.SKEW))
        assert ranked[:WITH_CONTINUATIONS] == [
            "halloween-v2",
            "stafford-v2",
            "smith-morra-v1",
            "smith-morra-v2",
            "halloween-v1",
            "reverse-stafford",
            "stafford-v1",
            "danish-v2",
            "danish-v1",
        ]
        assert ranked[WITH_CONTINUATIONS:] == sorted(ranked[WITH_CONTINUATIONS:])

    def test_reference_skew(self, reports: list[GambitReport]) -> None:
        """Test the order by published skewness."""
        ranked = _names(rank_gambits(reports, RankKey.REFERENCE_SKEW))
        assert ranked[:WITH_CONTINUATIONS] == [
            "smith-morra-v1",
            "halloween-v2",
            "danish-v1",
            "stafford-v1",
            "smith-morra-v2",
            "halloween-v1",
            "reverse-stafford",
            "stafford-v2",
            "danish-v2",
        ]

    def test_is_permutation(self, reports: list[GambitReport]) -> None:
        """Test that ranking neither drops nor duplicates reports."""
        for key in RankKey:
            assert sorted(_names(rank_gambits(reports, key))) == sorted(_names(reports))

    def test_rank_value(self, reports: list[GambitReport]) -> None:
        """Test the value used for each key."""
        by_name = {report.name: report for report in reports}
        assert rank_value(by_name["queens-gambit"], RankKey.INITIAL_Q) == pytest.approx(0.39)
        assert rank_value(by_name["queens-gambit"], RankKey.SKEW) is None
        danish = rank_value(by_name["danish-v1"], RankKey.VOLATILITY)
        assert danish == pytest.approx(0.0374, abs=1e-4)

    def test_unknown_key(self, reports: list[GambitReport]) -> None:
        """Test that an unknown key is rejected."""
        with pytest.raises(ValueError, match="alphabetical"):
            rank_gambits(reports, "alphabetical")


class TestAggregateSummary:
    """Tests for aggregate_summary."""

    def test_published_means(self, reports: list[GambitReport]) -> None:
        """Test the averages of the published values over the nine lines."""
        summary = aggregate_summary(reports, "raw")
        assert summary.gambits == WITH_CONTINUATIONS
        assert summary.reference_skewness == pytest.approx(0.999, abs=1e-3)
        assert summary.reference_volatility == pytest.approx(0.093, abs=1e-3)
        assert summary.current_q == pytest.approx(-0.931, abs=1e-3)
        assert summary.pre_gambit_q == pytest.approx(0.144, abs=1e-3)

    def test_mode_changes_statistics_only(self, reports: list[GambitReport]) -> None:
        """Test that raw and renormalized summaries share their Q averages."""
        raw = aggregate_summary(reports, "raw")
        renorm = aggregate_summary(reports, "renorm")
        assert raw.current_q == renorm.current_q
        assert raw.continuation_q == renorm.continuation_q
        assert renorm.player_probability == pytest.approx(0.2)
        assert raw.player_probability < renorm.player_probability

    def test_mates_left_out_of_pawn_averages(self, reports: list[GambitReport]) -> None:
        """Test that the mate cell does not turn the continuation average infinite."""
        assert math.isfinite(aggregate_summary(reports).continuation_q)

    def test_no_rows(self, reports: list[GambitReport]) -> None:
        """Test that a summary over lines without continuations is refused."""
        without = [report for report in reports if not report.rows]
        with pytest.raises(EmptyRowsError):
            aggregate_summary(without)
