"""Report tables: aligned text for reading and CSV for plotting.

Every file goes through ``write_to_file``, so a failed run leaves no partial
files behind, and floats use fixed formats so identical inputs give identical
bytes.
"""

from __future__ import annotations

import logging
import math
from dataclasses import asdict
from typing import TYPE_CHECKING

import pandas as pd

from gambit_lab.constants import (
    CONTINUATION_COLUMNS,
    PROBABILITY_MODES,
    Q_SERIES_COLUMNS,
    RANKING_INITIAL_Q_COLUMNS,
    RANKING_SKEW_COLUMNS,
    StatisticsRow,
)
from gambit_lab.errors import EmptyRowsError
from gambit_lab.file_utils import write_to_file
from gambit_lab.metrics.gambit import format_q
from gambit_lab.metrics.ranking import RankKey, aggregate_summary, rank_gambits
from gambit_lab.utils import format_signed

if TYPE_CHECKING:
    from collections.abc import Sequence
    from pathlib import Path

    from gambit_lab.metrics.gambit import GambitReport
    from gambit_lab.pipeline.analyzer import AnalysisFailure

logger = logging.getLogger(__name__)

CSV_FLOAT_FORMAT = "%.6f"


def _to_csv(df: pd.DataFrame) -> str:
    return df.to_csv(index=False, float_format=CSV_FLOAT_FORMAT, na_rep="", lineterminator="\n")


def _to_text(df: pd.DataFrame) -> str:
    if df.empty:
        return "(none)"
    return df.to_string(index=False, float_format="{:.4f}".format, na_rep="-")


def continuations_frame(report: GambitReport) -> pd.DataFrame:
    """Return the continuation table in both probability modes."""
    raw = report.rows.get("raw", ())
    renorm = report.rows.get("renorm", ())
    records = [
        {
            "move": row.move,
            "q_value": format_q(row.q),
            "player_probability": row.probability,
            "renorm_probability": renormed.probability,
            "win_probability": float(row.win_probability),
            "count": row.count,
        }
        for row, renormed in zip(raw, renorm, strict=True)
    ]
    return pd.DataFrame(records, columns=list(CONTINUATION_COLUMNS))


def statistics_frame(report: GambitReport) -> pd.DataFrame:
    """Return one statistics row per probability mode."""
    records: list[StatisticsRow] = [
        StatisticsRow(**asdict(report.statistics[mode]))  # type: ignore[typeddict-item]
        for mode in PROBABILITY_MODES
        if mode in report.statistics
    ]
    return pd.DataFrame(records, columns=list(StatisticsRow.__annotations__))


def q_series_frame(report: GambitReport) -> pd.DataFrame:
    """Return the Q-value series: mainline plies, then continuation points."""
    records = [
        {
            "ply": point.ply,
            "move": point.move,
            "side": point.side,
            "q_value": format_q(point.q),
            "win_probability": float(point.win_probability),
            "kind": point.kind,
        }
        for point in report.q_series
    ]
    return pd.DataFrame(records, columns=list(Q_SERIES_COLUMNS))


def reference_frame(report: GambitReport) -> pd.DataFrame:
    """Return reference skewness and volatility next to the recomputed values."""
    reference = report.reference
    if reference is None or reference.skewness is None or not report.statistics:
        return pd.DataFrame()
    records = []
    for mode in PROBABILITY_MODES:
        stats = report.statistics.get(mode)
        if stats is None:
            continue
        volatility = math.nan if reference.volatility is None else reference.volatility
        records.append(
            {
                "mode": mode,
                "skewness": stats.skewness,
                "reference_skewness": reference.skewness,
                "delta_skewness": report.delta_skewness(mode),
                "volatility": stats.volatility,
                "reference_volatility": volatility,
                "delta_volatility": volatility - stats.volatility,
                "skew_flag": report.skew_flag(mode),
            }
        )
    return pd.DataFrame(records)


def render_report(report: GambitReport) -> str:
    """Render the human-readable report of one gambit."""
    spec = report.spec
    bellman = report.bellman
    classification = report.classification
    search = f"depth {report.depth}"
    if report.movetime_ms is not None:
        search += f", movetime {report.movetime_ms} ms"
    lines = [
        f"Gambit: {spec.display_title} ({spec.name})",
        f"Opening: {spec.opening or '-'}",
        f"Gambiteer: {spec.gambiteer_name}",
        f"Line: {' '.join(spec.mainline.sans)}",
        f"Gambit ply: {spec.gambit_ply} ({spec.mainline.sans[spec.gambit_ply - 1]})",
        f"Engine: {report.engine} {search}",
        f"Corpus: {report.corpus_id or '-'} ({report.transitions_total} games at branch)",
        f"Probability mode: {report.mode}",
        "",
        f"Pre-gambit Q-value: {format_q(report.pre_gambit_q)}",
        f"Initial Q-value: {format_q(report.initial_q)}",
        f"Current Q-value: {format_q(report.current_q)}",
        f"Test statistic: {format_signed(report.test_statistic)}",
        f"Bellman check: {bellman.label} (gap {bellman.gap:.2f})",
        "Classification: "
        + (
            "n/a"
            if classification is None
            else f"{classification.label} (strict: {'yes' if classification.strict else 'no'})"
        ),
    ]
    if report.rows:
        lines += [
            "",
            "Continuations:",
            _to_text(continuations_frame(report)),
            "",
            "Statistics:",
            _to_text(statistics_frame(report)),
        ]
    reference = reference_frame(report)
    if not reference.empty:
        lines += ["", "Reference comparison:", _to_text(reference)]
    return "\n".join(lines) + "\n"


def write_gambit_report(report: GambitReport, out_dir: Path) -> list[Path]:
    """Write the report files of one gambit into ``out_dir/<name>/``.

    Returns:
        The written paths.
    """
    target = out_dir / report.name
    files = {
        target / "report.txt": render_report(report),
        target / "q_series.csv": _to_csv(q_series_frame(report)),
    }
    if report.rows:
        files[target / "continuations.csv"] = _to_csv(continuations_frame(report))
        files[target / "statistics.csv"] = _to_csv(statistics_frame(report))
    for path, content in files.items():
        write_to_file(path, content)
    logger.info("Wrote %d report files for %s to %s", len(files), report.name, target)
    return list(files)


def ranking_initial_q_frame(reports: Sequence[GambitReport]) -> pd.DataFrame:
    """Rank openings by initial Q-value, one row per opening (its first line)."""
    seen: set[str] = set()
    firsts = []
    for report in reports:
        opening = report.spec.opening or report.name
        if opening not in seen:
            seen.add(opening)
            firsts.append(report)
    records = [
        {
            "rank": rank,
            "name": report.name,
            "opening": report.spec.opening,
            "gambiteer": report.spec.gambiteer_name,
            "initial_q": format_q(report.initial_q),
        }
        for rank, report in enumerate(rank_gambits(firsts, RankKey.INITIAL_Q), start=1)
    ]
    return pd.DataFrame(records, columns=list(RANKING_INITIAL_Q_COLUMNS))


def ranking_skew_frame(
    reports: Sequence[GambitReport], key: RankKey = RankKey.SKEW
) -> pd.DataFrame:
    """Rank gambits with continuations by skewness (recomputed or reference)."""
    with_rows = [report for report in reports if report.selected is not None]
    records = []
    for rank, report in enumerate(rank_gambits(with_rows, key), start=1):
        stats = report.selected
        reference = report.reference
        records.append(
            {
                "rank": rank,
                "name": report.name,
                "skewness": stats.skewness if stats else math.nan,
                "volatility": stats.volatility if stats else math.nan,
                "reference_skewness": (
                    math.nan
                    if reference is None or reference.skewness is None
                    else reference.skewness
                ),
                "reference_volatility": (
                    math.nan
                    if reference is None or reference.volatility is None
                    else reference.volatility
                ),
                "delta_skewness": report.delta_skewness(),
                "skew_flag": report.skew_flag(),
            }
        )
    return pd.DataFrame(records, columns=list(RANKING_SKEW_COLUMNS))


def summary_frame(reports: Sequence[GambitReport]) -> pd.DataFrame:
    """Return the cross-gambit averages, one row per probability mode."""
    records = []
    for mode in PROBABILITY_MODES:
        try:
            records.append(asdict(aggregate_summary(reports, mode)))
        except EmptyRowsError:
            logger.info("No continuation statistics in mode %s; summary row skipped", mode)
    return pd.DataFrame(records)


def failures_frame(failures: Sequence[AnalysisFailure]) -> pd.DataFrame:
    """Return the failed gambits."""
    return pd.DataFrame(
        [asdict(failure) for failure in failures],
        columns=["name", "error", "message", "exit_code"],
    )


def write_ranking(
    reports: Sequence[GambitReport], failures: Sequence[AnalysisFailure], out_dir: Path
) -> list[Path]:
    """Write the ranking files into ``out_dir``.

    Returns:
        The written paths.
    """
    initial_q = ranking_initial_q_frame(reports)
    skew = ranking_skew_frame(reports, RankKey.SKEW)
    reference_skew = ranking_skew_frame(reports, RankKey.REFERENCE_SKEW)
    summary = summary_frame(reports)
    text = "\n".join(
        [
            "Ranking by initial Q-value:",
            _to_text(initial_q),
            "",
            "Ranking by skewness:",
            _to_text(skew),
            "",
            "Ranking by reference skewness:",
            _to_text(reference_skew),
            "",
            "Summary:",
            _to_text(summary),
        ]
    )
    files = {
        out_dir / "ranking_initial_q.csv": _to_csv(initial_q),
        out_dir / "ranking_skew.csv": _to_csv(skew),
        out_dir / "ranking_reference_skew.csv": _to_csv(reference_skew),
        out_dir / "summary.csv": _to_csv(summary),
        out_dir / "ranking.txt": text + "\n",
    }
    if failures:
        files[out_dir / "failures.csv"] = _to_csv(failures_frame(failures))
    else:
        (out_dir / "failures.csv").unlink(missing_ok=True)
    for path, content in files.items():
        write_to_file(path, content)
    logger.info("Wrote ranking of %d gambits to %s", len(reports), out_dir)
    return list(files)
