"""Ranking of analyzed gambits and the cross-gambit summary row."""

from __future__ import annotations

import logging
import math
from dataclasses import dataclass
from enum import Enum
from typing import TYPE_CHECKING

import numpy as np

from gambit_lab.errors import EmptyRowsError
from gambit_lab.eval_model import MateFlag
from gambit_lab.metrics.gambit import q_as_float

if TYPE_CHECKING:
    from collections.abc import Sequence

    from gambit_lab.eval_model import GambiteerValue
    from gambit_lab.metrics.gambit import GambitReport

logger = logging.getLogger(__name__)


class RankKey(str, Enum):
    """Quantity gambits are ranked by, ascending."""

    INITIAL_Q = "initial-q"
    SKEW = "skew"
    VOLATILITY = "volatility"
    REFERENCE_SKEW = "reference-skew"


def rank_value(report: GambitReport, key: RankKey) -> float | None:
    """Return the value a report is ranked by, or None when it has none."""
    if key is RankKey.INITIAL_Q:
        return q_as_float(report.initial_q)
    if key is RankKey.REFERENCE_SKEW:
        return None if report.reference is None else report.reference.skewness
    stats = report.selected
    if stats is None:
        return None
    return stats.skewness if key is RankKey.SKEW else stats.volatility


def rank_gambits(reports: Sequence[GambitReport], key: RankKey | str) -> list[GambitReport]:
    """Order reports by a key, ascending.

    Ties are broken by name. Reports without a value for the key (for example
    no continuations when ranking by skew) come last.

    Args:
        reports: Reports to rank.
        key: Ranking key or its string value.

    Returns:
        A permutation of ``reports``.
    """
    key = RankKey(key)

    def sort_key(report: GambitReport) -> tuple[bool, float, str]:
        value = rank_value(report, key)
        missing = value is None or math.isnan(value)
        return (missing, 0.0 if missing else value, report.name)  # type: ignore[return-value]

    ranked = sorted(reports, key=sort_key)
    logger.debug("Ranked %d gambits by %s", len(ranked), key.value)
    return ranked


def _finite(value: GambiteerValue | None) -> float:
    if value is None or isinstance(value, MateFlag):
        return math.nan
    return value.value


def _nanmean(values: Sequence[float]) -> float:
    array = np.asarray(values, dtype=np.float64)
    if array.size == 0 or np.all(np.isnan(array)):
        return math.nan
    return float(np.nanmean(array))


@dataclass(frozen=True)
class AggregateSummary:
    """Unweighted averages across analyzed gambits for one probability mode.

    Continuation averages run over every continuation cell; report averages
    over every gambit with continuations. Mates are left out of pawn averages.

    Attributes:
        mode: Probability mode.
        gambits: Number of gambits averaged.
        current_q: Mean branch-position Q-value.
        pre_gambit_q: Mean pre-gambit Q-value.
        continuation_q: Mean continuation Q-value in pawns.
        skewness: Mean recomputed skewness.
        volatility: Mean recomputed volatility.
        player_probability: Mean continuation probability.
        win_probability: Mean continuation win probability.
        weighted_win_prob: Mean over gambits of sum of p times w.
        weighted_win_prob_per_cell: Mean over cells of p times w.
        weighted_win_prob_of_means: Mean probability times mean win probability.
        reference_skewness: Mean reference skewness, where configured.
        reference_volatility: Mean reference volatility, where configured.
    """

    mode: str
    gambits: int
    current_q: float
    pre_gambit_q: float
    continuation_q: float
    skewness: float
    volatility: float
    player_probability: float
    win_probability: float
    weighted_win_prob: float
    weighted_win_prob_per_cell: float
    weighted_win_prob_of_means: float
    reference_skewness: float = math.nan
    reference_volatility: float = math.nan


def aggregate_summary(reports: Sequence[GambitReport], mode: str = "renorm") -> AggregateSummary:
    """Average the gambit statistics of several reports.

    Args:
        reports: Analyzed gambits; those without continuations are skipped.
        mode: Probability mode whose rows and statistics are averaged.

    Returns:
        The summary row.

    Raises:
        EmptyRowsError: If no report has continuation statistics in ``mode``.
    """
    included = [r for r in reports if mode in r.statistics and r.rows.get(mode)]
    if not included:
        msg = f"No report has continuation statistics in mode {mode!r}"
        raise EmptyRowsError(msg)

    cells = [row for r in included for row in r.rows[mode]]
    probabilities = [row.probability for row in cells]
    wins = [float(row.win_probability) for row in cells]
    mean_p = float(np.mean(probabilities))
    mean_w = float(np.mean(wins))
    references = [r.reference for r in included if r.reference is not None]

    return AggregateSummary(
        mode=mode,
        gambits=len(included),
        current_q=_nanmean([_finite(r.current_q) for r in included]),
        pre_gambit_q=_nanmean([_finite(r.pre_gambit_q) for r in included]),
        continuation_q=_nanmean([_finite(row.q) for row in cells]),
        skewness=float(np.mean([r.statistics[mode].skewness for r in included])),
        volatility=float(np.mean([r.statistics[mode].volatility for r in included])),
        player_probability=mean_p,
        win_probability=mean_w,
        weighted_win_prob=float(np.mean([r.statistics[mode].weighted_win_prob for r in included])),
        weighted_win_prob_per_cell=float(np.mean(np.multiply(probabilities, wins))),
        weighted_win_prob_of_means=mean_p * mean_w,
        reference_skewness=_nanmean(
            [math.nan if ref.skewness is None else ref.skewness for ref in references]
        ),
        reference_volatility=_nanmean(
            [math.nan if ref.volatility is None else ref.volatility for ref in references]
        ),
    )
