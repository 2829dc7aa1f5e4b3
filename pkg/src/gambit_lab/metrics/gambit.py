"""Gambit definitions, continuation statistics and optimality checks.

All moments are taken over continuation win probabilities. Q-values are in
pawns from the gambiteer's perspective.
"""

from __future__ import annotations

import logging
import math
from dataclasses import dataclass, field
from functools import cached_property
from typing import TYPE_CHECKING

import chess

from gambit_lab.constants import DEFAULT_CONTINUATIONS, SKEW_FLAG_THRESHOLD, WIN_PROB_TOLERANCE
from gambit_lab.errors import (
    EmptyRowsError,
    InvalidGambitError,
    NotationError,
    UnitMismatchError,
)
from gambit_lab.eval_model import (
    GambiteerValue,
    MateFlag,
    PawnAdvantage,
    WinProb,
    same_perspective,
    win_probability_of,
)
from gambit_lab.metrics.moments import weighted_moments
from gambit_lab.notation.san import Mainline, parse_mainline

if TYPE_CHECKING:
    from collections.abc import Sequence

logger = logging.getLogger(__name__)


@dataclass(frozen=True)
class GambitSpec:
    """A gambit line to analyze.

    Attributes:
        name: Unique identifier, e.g. "stafford-v1".
        movetext: Mainline from the initial position to the branch position.
        gambit_ply: 1-based ply at which the gambiteer plays the gambit move.
        gambiteer: Color offering the gambit.
        opening: Opening family, shared by variations.
        title: Human-readable title for reports.
        continuations: Opponent replies to analyze (SAN); when empty the most
            frequent corpus replies are used.
        k: Number of continuations.
    """

    name: str
    movetext: str
    gambit_ply: int
    gambiteer: chess.Color
    opening: str = ""
    title: str = ""
    continuations: tuple[str, ...] = ()
    k: int = DEFAULT_CONTINUATIONS

    def __post_init__(self) -> None:
        """Check that the line parses and the gambit ply is consistent.

        Raises:
            InvalidGambitError: If the mainline is illegal, the gambit ply lies
                outside it, the gambit move is not the gambiteer's, or the
                gambiteer is to move at the branch position.
        """
        try:
            mainline = self.mainline
        except NotationError as e:
            msg = f"Gambit {self.name!r}: mainline does not parse: {e}"
            raise InvalidGambitError(msg) from e
        if not 1 <= self.gambit_ply <= len(mainline):
            msg = f"Gambit {self.name!r}: gambit ply {self.gambit_ply} outside 1..{len(mainline)}"
            raise InvalidGambitError(msg)
        if mainline.steps[self.gambit_ply - 1][0].turn != self.gambiteer:
            msg = f"Gambit {self.name!r}: ply {self.gambit_ply} is not played by the gambiteer"
            raise InvalidGambitError(msg)
        if mainline.final.turn == self.gambiteer:
            msg = f"Gambit {self.name!r}: the opponent must be to move at the branch position"
            raise InvalidGambitError(msg)
        if self.continuations and len(self.continuations) != self.k:
            object.__setattr__(self, "k", len(self.continuations))

    @cached_property
    def mainline(self) -> Mainline:
        """Return the parsed mainline."""
        return parse_mainline(self.movetext)

    @property
    def gambiteer_name(self) -> str:
        """Return "white" or "black"."""
        return chess.COLOR_NAMES[self.gambiteer]

    @property
    def display_title(self) -> str:
        """Return the title, falling back to the name."""
        return self.title or self.name


@dataclass(frozen=True)
class ReferenceValues:
    """Published values a recomputed report is compared against.

    Attributes:
        current_q: Branch position Q-value.
        pre_gambit_q: Q-value before the gambit move.
        initial_q: Q-value right after the gambit move.
        skewness: Published skewness.
        volatility: Published volatility.
        q_values: Continuation Q cells, e.g. "-2.56" or "#5".
        probabilities: Continuation player probabilities.
        win_probabilities: Continuation win probabilities.
    """

    current_q: float | None = None
    pre_gambit_q: float | None = None
    initial_q: float | None = None
    skewness: float | None = None
    volatility: float | None = None
    q_values: tuple[str, ...] = ()
    probabilities: tuple[float, ...] = ()
    win_probabilities: tuple[float, ...] = ()

    @property
    def continuation_values(self) -> list[GambiteerValue]:
        """Return the continuation Q cells as pawn advantages or mate flags."""
        return [parse_q_cell(cell) for cell in self.q_values]

    def rows(self, moves: Sequence[str]) -> list[ContinuationRow]:
        """Build continuation rows from the published cells.

        Args:
            moves: SAN of each continuation, in cell order.

        Returns:
            Rows carrying the published probabilities and win probabilities.
        """
        return [
            ContinuationRow(move, q, p, WinProb(w))
            for move, q, p, w in zip(
                moves,
                self.continuation_values,
                self.probabilities,
                self.win_probabilities,
                strict=True,
            )
        ]


def parse_q_cell(cell: str) -> GambiteerValue:
    """Parse a Q cell such as "+1.48", "0.00" or "#5" (mate in 5 for the gambiteer)."""
    text = cell.strip()
    if text.startswith("#"):
        moves = int(text[1:])
        return MateFlag(winning=moves > 0, moves=abs(moves))
    return PawnAdvantage(float(text))


def format_q(value: GambiteerValue) -> str:
    """Render a Q-value as "+1.48" or "#5"/"#-5"."""
    if isinstance(value, MateFlag):
        return f"#{value.moves}" if value.winning else f"#-{value.moves}"
    return f"{value.value:+.2f}"


def q_as_float(value: GambiteerValue) -> float:
    """Return the pawn value, with mates as positive or negative infinity."""
    if isinstance(value, MateFlag):
        return math.inf if value.winning else -math.inf
    return value.value


@dataclass(frozen=True)
class ContinuationRow:
    """One opponent reply at the branch position.

    Attributes:
        move: SAN of the reply.
        q: Q-value after the reply, gambiteer perspective.
        probability: Player probability under the row's probability mode.
        win_probability: Win probability of ``q``.
        count: Corpus games that played the reply.
    """

    move: str
    q: GambiteerValue
    probability: float
    win_probability: WinProb
    count: int = 0

    def __post_init__(self) -> None:
        """Validate the probability and the Q/win-probability pairing."""
        if not 0.0 <= self.probability <= 1.0:
            msg = f"Row {self.move}: probability {self.probability} outside [0, 1]"
            raise ValueError(msg)
        expected = win_probability_of(self.q)
        if abs(expected - self.win_probability) > WIN_PROB_TOLERANCE:
            msg = (
                f"Row {self.move}: win probability {self.win_probability:.3f} does not match "
                f"Q {format_q(self.q)} ({expected:.3f})"
            )
            raise ValueError(msg)

    @classmethod
    def from_q(
        cls, move: str, q: GambiteerValue, probability: float, count: int = 0
    ) -> ContinuationRow:
        """Build a row whose win probability is derived from its Q-value."""
        return cls(move, q, probability, win_probability_of(q), count)


def _require_rows(rows: Sequence[ContinuationRow]) -> None:
    if not rows:
        msg = "No continuation rows"
        raise EmptyRowsError(msg)


def q_star(rows: Sequence[ContinuationRow]) -> WinProb:
    """Return the probability-weighted mean continuation win probability.

    Raises:
        EmptyRowsError: If ``rows`` is empty.
    """
    _require_rows(rows)
    moments = weighted_moments([r.probability for r in rows], [r.win_probability for r in rows])
    return WinProb(min(max(moments.mean, 0.0), 1.0))


def volatility(rows: Sequence[ContinuationRow]) -> float:
    """Return the weighted standard deviation of continuation win probabilities.

    Raises:
        EmptyRowsError: If ``rows`` is empty.
    """
    _require_rows(rows)
    return weighted_moments(
        [r.probability for r in rows], [r.win_probability for r in rows]
    ).sigma


def skewness(rows: Sequence[ContinuationRow]) -> float:
    """Return the weighted skewness of continuation win probabilities (0 if degenerate).

    Raises:
        EmptyRowsError: If ``rows`` is empty.
    """
    _require_rows(rows)
    return weighted_moments(
        [r.probability for r in rows], [r.win_probability for r in rows]
    ).skewness


def weighted_win_prob(rows: Sequence[ContinuationRow]) -> WinProb:
    """Return the sum of player probability times win probability.

    Raises:
        EmptyRowsError: If ``rows`` is empty.
    """
    _require_rows(rows)
    total = math.fsum(r.probability * r.win_probability for r in rows)
    return WinProb(min(max(total, 0.0), 1.0))


def test_statistic(v: PawnAdvantage | WinProb, q_g: PawnAdvantage | WinProb) -> float:
    """Return how much value the gambit leaves on the table, ``V(s) - Q(s, a_G)``.

    Args:
        v: Value of the best move at the position.
        q_g: Value of the gambit move, in the same units and perspective.

    Returns:
        The difference; non-negative when the best move really is optimal.

    Raises:
        UnitMismatchError: If one value is a pawn advantage and the other a win probability.
        PerspectiveMismatchError: If the pawn advantages have different perspectives.
    """
    if isinstance(v, PawnAdvantage) != isinstance(q_g, PawnAdvantage):
        msg = f"Cannot subtract {type(q_g).__name__} from {type(v).__name__}"
        raise UnitMismatchError(msg)
    if isinstance(v, PawnAdvantage) and isinstance(q_g, PawnAdvantage):
        same_perspective(v, q_g)
        return v.value - q_g.value
    return float(v) - float(q_g)


@dataclass(frozen=True)
class GambitClassification:
    """Outcome of the gambit predicate.

    Attributes:
        is_gambit: Negative Q-value with at least one positive continuation.
        strict: Negative Q-value with every continuation but the opponent's
            best reply positive.
    """

    is_gambit: bool
    strict: bool

    @property
    def label(self) -> str:
        """Return "gambit" or "non-gambit"."""
        return "gambit" if self.is_gambit else "non-gambit"


def classify_gambit(
    q_at_gambit: GambiteerValue | float, continuation_qs: Sequence[GambiteerValue | float]
) -> GambitClassification:
    """Decide whether a move is a gambit.

    Args:
        q_at_gambit: Q-value of the gambit move, gambiteer perspective.
        continuation_qs: Q-values after the opponent's candidate replies.

    Returns:
        The loose and strict classifications.
    """
    q = _as_number(q_at_gambit)
    values = [_as_number(c) for c in continuation_qs]
    is_gambit = q < 0 and any(c > 0 for c in values)
    others = sorted(values)[1:]
    strict = is_gambit and all(c > 0 for c in others)
    return GambitClassification(is_gambit, strict)


def _as_number(value: GambiteerValue | float) -> float:
    if isinstance(value, PawnAdvantage | MateFlag):
        return q_as_float(value)
    return float(value)


@dataclass(frozen=True)
class BellmanCheck:
    """Outcome of the optimality inequality ``Q(s*, a*(s*)) >= Q(s, a*(s))``.

    Attributes:
        consistent: Whether the child value is at least the parent value.
        gap: ``q_parent - q_child`` when violated, else 0.
    """

    consistent: bool
    gap: float

    @property
    def label(self) -> str:
        """Return "consistent" or "violated"."""
        return "consistent" if self.consistent else "violated"


def bellman_check(
    q_parent: PawnAdvantage | float, q_child: PawnAdvantage | float
) -> BellmanCheck:
    """Check the restated Bellman inequality along the played line.

    Args:
        q_parent: Value of the best move at the earlier position.
        q_child: Value of the best move at the later position.

    Returns:
        Consistent, or violated with the size of the drop.

    Raises:
        UnitMismatchError: If only one argument is a pawn advantage.
        PerspectiveMismatchError: If the perspectives differ.
    """
    if isinstance(q_parent, PawnAdvantage) != isinstance(q_child, PawnAdvantage):
        msg = "Bellman check needs both values in the same units"
        raise UnitMismatchError(msg)
    if isinstance(q_parent, PawnAdvantage) and isinstance(q_child, PawnAdvantage):
        same_perspective(q_parent, q_child)
    parent, child = _as_number(q_parent), _as_number(q_child)
    if child >= parent:
        return BellmanCheck(consistent=True, gap=0.0)
    return BellmanCheck(consistent=False, gap=parent - child)


@dataclass(frozen=True)
class GambitStatistics:
    """Continuation statistics under one probability mode.

    Attributes:
        mode: "raw" (published sub-unit probabilities) or "renorm".
        q_star: Weighted mean win probability.
        volatility: Weighted standard deviation of win probabilities.
        skewness: Weighted skewness of win probabilities.
        weighted_win_prob: Sum of probability times win probability.
        pawn_mean: Weighted mean Q in pawns (NaN when a row is a mate).
        pawn_volatility: Weighted standard deviation in pawns (NaN with a mate).
        pawn_skewness: Weighted skewness in pawns (NaN with a mate).
    """

    mode: str
    q_star: float
    volatility: float
    skewness: float
    weighted_win_prob: float
    pawn_mean: float = math.nan
    pawn_volatility: float = math.nan
    pawn_skewness: float = math.nan


def compute_statistics(rows: Sequence[ContinuationRow], mode: str) -> GambitStatistics:
    """Compute every continuation statistic for one probability mode.

    Raises:
        EmptyRowsError: If ``rows`` is empty.
    """
    _require_rows(rows)
    probabilities = [r.probability for r in rows]
    moments = weighted_moments(probabilities, [r.win_probability for r in rows])
    if any(isinstance(r.q, MateFlag) for r in rows):
        pawn = None
    else:
        pawn = weighted_moments(probabilities, [q_as_float(r.q) for r in rows])
    return GambitStatistics(
        mode=mode,
        q_star=moments.mean,
        volatility=moments.sigma,
        skewness=moments.skewness,
        weighted_win_prob=float(weighted_win_prob(rows)),
        pawn_mean=pawn.mean if pawn else math.nan,
        pawn_volatility=pawn.sigma if pawn else math.nan,
        pawn_skewness=pawn.skewness if pawn else math.nan,
    )


@dataclass(frozen=True)
class QSeriesPoint:
    """One point of the Q-value-over-time series.

    Attributes:
        ply: Plies played to reach the position.
        move: SAN of the move leading to it ("" at the start).
        side: Side to move in the position.
        q: Q-value, gambiteer perspective.
        kind: "mainline" or "continuation".
    """

    ply: int
    move: str
    side: str
    q: GambiteerValue
    kind: str = "mainline"

    @property
    def win_probability(self) -> WinProb:
        """Return the win probability of the point."""
        return win_probability_of(self.q)


@dataclass(frozen=True)
class GambitReport:
    """Everything computed for one gambit line.

    Attributes:
        spec: The analyzed gambit.
        initial_q: Q-value right after the gambit move.
        current_q: Q-value at the branch position.
        pre_gambit_q: Q-value right before the gambit move.
        rows: Continuation rows per probability mode.
        statistics: Continuation statistics per probability mode.
        mode: Probability mode selected for headline numbers.
        engine: Engine identity.
        depth: Search depth.
        movetime_ms: Search time per position in milliseconds, if limited.
        corpus_id: Corpus index digest, if a corpus was used.
        q_series: Q-value per mainline ply plus continuation points.
        reference: Published values, when configured.
        transitions_total: Corpus games reaching the branch position.
    """

    spec: GambitSpec
    initial_q: GambiteerValue
    current_q: GambiteerValue
    pre_gambit_q: GambiteerValue
    rows: dict[str, tuple[ContinuationRow, ...]] = field(default_factory=dict)
    statistics: dict[str, GambitStatistics] = field(default_factory=dict)
    mode: str = "renorm"
    engine: str = ""
    depth: int = 0
    movetime_ms: int | None = None
    corpus_id: str | None = None
    q_series: tuple[QSeriesPoint, ...] = ()
    reference: ReferenceValues | None = None
    transitions_total: int = 0

    @property
    def name(self) -> str:
        """Return the gambit name."""
        return self.spec.name

    @property
    def selected(self) -> GambitStatistics | None:
        """Return the statistics of the selected mode, if continuations exist."""
        return self.statistics.get(self.mode)

    @property
    def selected_rows(self) -> tuple[ContinuationRow, ...]:
        """Return the rows of the selected mode."""
        return self.rows.get(self.mode, ())

    @property
    def test_statistic(self) -> float:
        """Return the pre-gambit value minus the current value."""
        return _as_number(self.pre_gambit_q) - _as_number(self.current_q)

    @property
    def bellman(self) -> BellmanCheck:
        """Check the current value against the pre-gambit value."""
        return bellman_check(_as_number(self.pre_gambit_q), _as_number(self.current_q))

    @property
    def classification(self) -> GambitClassification | None:
        """Classify from the initial Q-value; None without continuations."""
        if not self.selected_rows:
            return None
        return classify_gambit(self.initial_q, [row.q for row in self.selected_rows])

    def delta_skewness(self, mode: str | None = None) -> float:
        """Return the reference skewness minus the recomputed one (NaN if unknown)."""
        stats = self.statistics.get(mode or self.mode)
        if stats is None or self.reference is None or self.reference.skewness is None:
            return math.nan
        return self.reference.skewness - stats.skewness

    def skew_flag(self, mode: str | None = None) -> bool:
        """Return whether the recomputed skewness strays from the reference."""
        delta = self.delta_skewness(mode)
        return not math.isnan(delta) and abs(delta) > SKEW_FLAG_THRESHOLD
