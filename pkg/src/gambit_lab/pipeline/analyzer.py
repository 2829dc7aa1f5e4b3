"""Gambit analysis: engine values along the line plus human continuation statistics."""

from __future__ import annotations

import logging
from dataclasses import dataclass
from typing import TYPE_CHECKING

import chess
from joblib import Parallel, delayed

from gambit_lab.constants import DEFAULT_MIN_GAMES, PROBABILITY_MODES
from gambit_lab.corpus.index import build_index_from_paths, load_index
from gambit_lab.corpus.transitions import (
    TransitionDistribution,
    query_transitions,
    restrict_and_renormalize,
)
from gambit_lab.engine.cache import CachedEvaluator, EvaluationCache
from gambit_lab.errors import CorpusError, CorpusReadError, GambitLabError
from gambit_lab.eval_model import to_gambiteer_perspective
from gambit_lab.file_utils import expand_paths, timeit
from gambit_lab.metrics.gambit import (
    ContinuationRow,
    GambitReport,
    GambitStatistics,
    QSeriesPoint,
    compute_statistics,
)
from gambit_lab.notation.san import parse_san, render_san

if TYPE_CHECKING:
    from collections.abc import Sequence

    from gambit_lab.board import Move, Position
    from gambit_lab.corpus.index import CorpusIndex
    from gambit_lab.eval_model import GambiteerValue
    from gambit_lab.metrics.gambit import GambitSpec, ReferenceValues
    from gambit_lab.pipeline.config import CorpusConfig, RunConfig

logger = logging.getLogger(__name__)


@dataclass(frozen=True)
class AnalysisFailure:
    """A gambit whose analysis raised.

    Attributes:
        name: Gambit name.
        error: Exception class name.
        message: Exception message.
        exit_code: Exit code of the exception family.
    """

    name: str
    error: str
    message: str
    exit_code: int


def load_corpus(config: CorpusConfig, n_jobs: int = 1) -> CorpusIndex | None:
    """Load the configured corpus index, building it from PGN files if needed.

    Args:
        config: Corpus settings.
        n_jobs: Parallel jobs for indexing.

    Returns:
        The index, or None when no corpus is configured.

    Raises:
        CorpusReadError: If the index or a PGN file is missing or unreadable.
        IndexVersionError: If the index has another format version.
        IndexCorruptionError: If the index fails its checksum.
    """
    if config.index is not None and (config.index.exists() or not config.paths):
        return load_index(config.index)
    if not config.paths:
        return None
    paths = expand_paths(list(config.paths), "pgn")
    missing = [str(path) for path in config.paths if not path.exists()]
    if missing:
        msg = f"Corpus paths do not exist: {missing}"
        raise CorpusReadError(msg)
    return build_index_from_paths(paths, config.max_ply, n_jobs=n_jobs)


def _continuation_moves(
    spec: GambitSpec, branch: Position, distribution: TransitionDistribution
) -> list[Move]:
    if spec.continuations:
        return [parse_san(branch, san) for san in spec.continuations]
    return distribution.moves[: spec.k]


def analyze_gambit(
    spec: GambitSpec,
    evaluator: CachedEvaluator,
    index: CorpusIndex | None = None,
    *,
    reference: ReferenceValues | None = None,
    mode: str = "renorm",
    min_games: int = DEFAULT_MIN_GAMES,
    smoothing: float = 0.0,
    corpus_id: str | None = None,
) -> GambitReport:
    """Analyze one gambit line.

    Every mainline position is evaluated for the Q-value series. When the
    gambit asks for continuations, the human replies at the branch position
    are looked up in the corpus and each reply is evaluated.

    Args:
        spec: The gambit.
        evaluator: Cached engine evaluator.
        index: Corpus index; required when ``spec.k > 0``.
        reference: Published values to annotate the report with.
        mode: Probability mode for headline numbers.
        min_games: Fewest corpus games that must reach the branch position.
        smoothing: Additive pseudo-count for the transition distribution.
        corpus_id: Corpus id for provenance; computed from ``index`` when omitted.

    Returns:
        The report.

    Raises:
        CorpusError: If continuations are needed and the corpus cannot supply them.
        EngineError: If an evaluation fails.
    """
    mainline = spec.mainline
    values: list[GambiteerValue] = []
    series: list[QSeriesPoint] = []
    for ply in range(len(mainline) + 1):
        position = mainline.position_at(ply)
        q = to_gambiteer_perspective(evaluator.score(position), spec.gambiteer, position.turn)
        values.append(q)
        move = mainline.sans[ply - 1] if ply else ""
        series.append(QSeriesPoint(ply, move, chess.COLOR_NAMES[position.turn], q))

    rows: dict[str, tuple[ContinuationRow, ...]] = {}
    statistics: dict[str, GambitStatistics] = {}
    total = 0
    if spec.k > 0:
        if index is None:
            msg = f"Gambit {spec.name!r} needs a corpus for its continuation probabilities"
            raise CorpusError(msg)
        corpus_id = corpus_id or index.corpus_id
        branch = mainline.final
        distribution = query_transitions(index, branch, min_games, smoothing, corpus_id)
        total = distribution.total
        moves = _continuation_moves(spec, branch, distribution)
        restricted = restrict_and_renormalize(distribution, moves)
        scores = evaluator.evaluate_moves(branch, moves)
        sans = {move: render_san(branch, move) for move in moves}
        qs = {
            move: to_gambiteer_perspective(scores[move], spec.gambiteer, branch.turn)
            for move in moves
        }
        probabilities = {"raw": distribution.probability, "renorm": restricted.probability}
        for probability_mode in PROBABILITY_MODES:
            rows[probability_mode] = tuple(
                ContinuationRow.from_q(
                    sans[move],
                    qs[move],
                    probabilities[probability_mode](move),
                    distribution.count(move),
                )
                for move in moves
            )
            statistics[probability_mode] = compute_statistics(
                rows[probability_mode], probability_mode
            )
        opponent = chess.COLOR_NAMES[not branch.turn]
        series.extend(
            QSeriesPoint(len(mainline) + 1, sans[move], opponent, qs[move], kind="continuation")
            for move in moves
        )

    report = GambitReport(
        spec=spec,
        initial_q=values[spec.gambit_ply],
        current_q=values[-1],
        pre_gambit_q=values[spec.gambit_ply - 1],
        rows=rows,
        statistics=statistics,
        mode=mode,
        engine=evaluator.identity,
        depth=evaluator.depth,
        movetime_ms=evaluator.limits.movetime_ms,
        corpus_id=corpus_id if spec.k > 0 else None,
        q_series=tuple(series),
        reference=reference,
        transitions_total=total,
    )
    logger.info("Analyzed %s: current Q %s", spec.name, values[-1])
    return report


def _analyze_one(
    spec: GambitSpec,
    config: RunConfig,
    cache: EvaluationCache,
    index: CorpusIndex | None,
    corpus_id: str | None,
) -> GambitReport | AnalysisFailure:
    evaluator = CachedEvaluator(
        config.engine.command,
        config.engine.name,
        config.engine.limits,
        cache,
        config.engine.options,
    )
    try:
        with evaluator:
            return analyze_gambit(
                spec,
                evaluator,
                index,
                reference=config.references.get(spec.name),
                mode=config.report.mode,
                min_games=config.corpus.min_games,
                smoothing=config.corpus.smoothing,
                corpus_id=corpus_id,
            )
    except GambitLabError as e:
        logger.warning("Analysis of %s failed: %s", spec.name, e)
        return AnalysisFailure(spec.name, type(e).__name__, str(e), e.exit_code)


@timeit
def analyze_all(
    config: RunConfig,
    specs: Sequence[GambitSpec],
    cache: EvaluationCache,
    index: CorpusIndex | None,
    n_jobs: int = 1,
) -> tuple[list[GambitReport], list[AnalysisFailure]]:
    """Analyze several gambits, each with its own engine session.

    Sessions share ``cache``; results come back in ``specs`` order.

    Args:
        config: Run configuration.
        specs: Gambits to analyze.
        cache: Shared evaluation cache.
        index: Corpus index, or None.
        n_jobs: Parallel analyses (threads).

    Returns:
        Successful reports and failures, each in ``specs`` order.
    """
    corpus_id = None if index is None else index.corpus_id
    outcomes = Parallel(n_jobs=n_jobs, prefer="threads")(
        delayed(_analyze_one)(spec, config, cache, index, corpus_id) for spec in specs
    )
    reports = [o for o in outcomes if isinstance(o, GambitReport)]
    failures = [o for o in outcomes if isinstance(o, AnalysisFailure)]
    logger.info("Analyzed %d gambits, %d failed", len(reports), len(failures))
    return reports, failures
