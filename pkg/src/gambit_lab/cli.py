"""Command-line interface: ``gambit-lab analyze | rank | corpus build | selfcheck``.

Exit codes: 0 success, 1 self-check failure, 2 configuration error, 3 engine
error, 4 corpus error, 5 ranking with failed gambits.
"""

from __future__ import annotations

import argparse
import logging
import sys
from dataclasses import replace
from pathlib import Path

from gambit_lab.corpus.index import build_index_from_paths, save_index
from gambit_lab.engine.cache import EvaluationCache
from gambit_lab.errors import AnalysisFailedError, ConfigError, CorpusReadError, GambitLabError
from gambit_lab.file_utils import expand_paths
from gambit_lab.logging_config import level_for_verbosity, setup_logging
from gambit_lab.pipeline.analyzer import analyze_all, load_corpus
from gambit_lab.pipeline.config import CorpusConfig, RunConfig, load_config
from gambit_lab.pipeline.reports import render_report, write_gambit_report, write_ranking
from gambit_lab.pipeline.selfcheck import run_selfcheck

logger = logging.getLogger(__name__)

DEFAULT_INDEX_NAME = "corpus.idx"


def _add_common(parser: argparse.ArgumentParser) -> None:
    parser.add_argument("--config", type=Path, default=None, help="TOML run configuration")
    parser.add_argument("-v", "--verbose", action="count", default=0, help="-v info, -vv debug")
    parser.add_argument(
        "--log-file", action="store_true", help="also log to a timestamped file under OUT/logs"
    )


def _add_run_options(parser: argparse.ArgumentParser) -> None:
    parser.add_argument("--engine", default=None, help="engine launch command")
    parser.add_argument("--engine-name", default=None, help="engine identity for cache and reports")
    parser.add_argument("--depth", type=int, default=None, help="search depth in plies")
    parser.add_argument(
        "--movetime", type=int, default=None, help="search time per position in milliseconds"
    )
    parser.add_argument("--multipv", type=int, default=None, help="lines per search")
    parser.add_argument(
        "--corpus", type=Path, default=None, help="corpus index, PGN file or directory"
    )
    parser.add_argument("--mode", choices=["raw", "renorm"], default=None, help="probability mode")
    parser.add_argument("--out", type=Path, default=None, help="output directory")
    parser.add_argument("--cache", type=Path, default=None, help="evaluation cache file")
    parser.add_argument("--jobs", type=int, default=1, help="parallel analyses")


def build_parser() -> argparse.ArgumentParser:
    """Build the argument parser."""
    parser = argparse.ArgumentParser(
        prog="gambit-lab",
        description="Engine, corpus and skewness analysis of chess gambits.",
    )
    verbs = parser.add_subparsers(dest="command", required=True)

    analyze = verbs.add_parser("analyze", help="analyze named gambits")
    analyze.add_argument("names", nargs="+", help="gambit names from the configuration")
    _add_common(analyze)
    _add_run_options(analyze)

    rank = verbs.add_parser("rank", help="analyze every gambit and rank them")
    _add_common(rank)
    _add_run_options(rank)

    corpus = verbs.add_parser("corpus", help="corpus commands")
    corpus_verbs = corpus.add_subparsers(dest="corpus_command", required=True)
    build = corpus_verbs.add_parser("build", help="index PGN files")
    build.add_argument("paths", nargs="*", type=Path, help="PGN files or directories")
    build.add_argument("--index", type=Path, default=None, help="index file to write")
    build.add_argument("--max-ply", type=int, default=None, help="plies indexed per game")
    build.add_argument("--jobs", type=int, default=1, help="parallel indexing jobs")
    _add_common(build)

    selfcheck = verbs.add_parser("selfcheck", help="run the embedded property checks")
    _add_common(selfcheck)
    return parser


def _corpus_override(corpus: CorpusConfig, path: Path) -> CorpusConfig:
    if path.is_dir() or path.suffix == ".pgn":
        return replace(corpus, paths=(path,), index=None)
    return replace(corpus, paths=(), index=path)


def _configure(args: argparse.Namespace) -> RunConfig:
    config = load_config(args.config)
    if args.command not in {"analyze", "rank"}:
        return config
    config = config.with_overrides(
        engine={
            "command": args.engine,
            "name": args.engine_name,
            "depth": args.depth,
            "movetime_ms": args.movetime,
            "multipv": args.multipv,
        },
        report={"mode": args.mode, "out": args.out, "cache": args.cache},
    )
    if args.corpus is not None:
        config = replace(config, corpus=_corpus_override(config.corpus, args.corpus))
    return config


def _setup_logging(args: argparse.Namespace, out: Path) -> None:
    setup_logging(
        out,
        level_for_verbosity(args.verbose),
        log_to_file=args.log_file,
        run_name=args.command,
    )


def cmd_analyze(config: RunConfig, names: list[str], n_jobs: int = 1) -> int:
    """Analyze the named gambits and write their reports.

    Returns:
        The exit code.

    Raises:
        GambitLabError: On configuration, engine or corpus failures.
    """
    specs = [config.gambit(name) for name in names]
    index = load_corpus(config.corpus, n_jobs) if any(spec.k > 0 for spec in specs) else None
    cache = EvaluationCache(config.report.cache)
    try:
        reports, failures = analyze_all(config, specs, cache, index, n_jobs)
    finally:
        cache.save()
    if failures:
        for failure in failures:
            print(f"{failure.name}: {failure.error}: {failure.message}", file=sys.stderr)
        return failures[0].exit_code
    for report in reports:
        write_gambit_report(report, config.report.out)
        print(render_report(report))
    return 0


def cmd_rank(config: RunConfig, n_jobs: int = 1) -> int:
    """Analyze every configured gambit and write the rankings and per-gambit reports.

    Returns:
        0, or the ranking exit code when any gambit failed.

    Raises:
        GambitLabError: On configuration or corpus failures before analysis.
    """
    if not config.gambits:
        msg = "No gambits configured"
        raise ConfigError(msg)
    index = (
        load_corpus(config.corpus, n_jobs) if any(spec.k > 0 for spec in config.gambits) else None
    )
    cache = EvaluationCache(config.report.cache)
    try:
        reports, failures = analyze_all(config, config.gambits, cache, index, n_jobs)
    finally:
        cache.save()
    for report in reports:
        write_gambit_report(report, config.report.out)
    write_ranking(reports, failures, config.report.out)
    print((config.report.out / "ranking.txt").read_text(encoding="utf-8"))
    if failures:
        for failure in failures:
            print(f"{failure.name}: {failure.error}: {failure.message}", file=sys.stderr)
        return AnalysisFailedError.exit_code
    return 0


def cmd_corpus_build(
    config: RunConfig,
    paths: list[Path],
    index_path: Path | None,
    max_ply: int | None = None,
    n_jobs: int = 1,
) -> int:
    """Index PGN files and save the index.

    Returns:
        The exit code.

    Raises:
        CorpusReadError: If an input is missing or unreadable.
    """
    sources = paths or list(config.corpus.paths)
    if not sources:
        msg = "No PGN inputs given or configured"
        raise ConfigError(msg)
    missing = [str(path) for path in sources if not path.exists()]
    if missing:
        msg = f"PGN inputs do not exist: {missing}"
        raise CorpusReadError(msg)
    target = index_path or config.corpus.index or config.report.out / DEFAULT_INDEX_NAME
    index = build_index_from_paths(
        expand_paths(sources, "pgn"), max_ply or config.corpus.max_ply, n_jobs=n_jobs
    )
    if index.stats.games_read == 0:
        logger.warning("No games read from %s", [str(p) for p in sources])
    save_index(index, target)
    stats = index.stats
    print(f"index: {target}")
    print(f"corpus_id: {index.corpus_id}")
    print(f"games_read: {stats.games_read}")
    print(f"games_skipped: {stats.games_skipped}")
    print(f"games_filtered: {stats.games_filtered}")
    print(f"plies_indexed: {stats.plies_indexed}")
    print(f"positions: {len(index)}")
    return 0


def cmd_selfcheck() -> int:
    """Run the property checks and print one line per check.

    Returns:
        0 when every check passes, else 1.
    """
    results = run_selfcheck()
    for result in results:
        print(result)
    passed = sum(result.passed for result in results)
    print(f"selfcheck: {passed}/{len(results)} checks passed")
    return 0 if passed == len(results) else 1


def main(argv: list[str] | None = None) -> int:
    """Run the command line.

    Args:
        argv: Arguments without the program name; ``sys.argv[1:]`` by default.

    Returns:
        The process exit code.
    """
    args = build_parser().parse_args(argv)
    try:
        config = _configure(args)
        _setup_logging(args, config.report.out)
        if args.command == "analyze":
            return cmd_analyze(config, args.names, args.jobs)
        if args.command == "rank":
            return cmd_rank(config, args.jobs)
        if args.command == "corpus":
            return cmd_corpus_build(config, args.paths, args.index, args.max_ply, args.jobs)
        return cmd_selfcheck()
    except GambitLabError as e:
        logger.error("%s: %s", type(e).__name__, e)  # noqa: TRY400
        print(f"error: {e}", file=sys.stderr)
        return e.exit_code


if __name__ == "__main__":
    sys.exit(main())
