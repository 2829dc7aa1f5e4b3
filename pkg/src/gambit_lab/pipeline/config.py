"""Run configuration loaded from TOML.

See ``docs/configuration.md`` for the grammar. The default configuration
ships as ``gambit_lab/data/gambits.toml``.
"""

from __future__ import annotations

import logging
import tomllib
from dataclasses import dataclass, field, replace
from importlib import resources
from pathlib import Path
from typing import Any

import chess

from gambit_lab.constants import (
    DEFAULT_CONTINUATIONS,
    DEFAULT_DEPTH,
    DEFAULT_HANDSHAKE_TIMEOUT,
    DEFAULT_HASH_MB,
    DEFAULT_MAX_PLY,
    DEFAULT_MIN_GAMES,
    DEFAULT_MULTIPV,
    PROBABILITY_MODES,
)
from gambit_lab.engine.scores import SearchLimits
from gambit_lab.engine.session import EngineOptions
from gambit_lab.errors import ConfigError, InvalidGambitError
from gambit_lab.metrics.gambit import GambitSpec, ReferenceValues, parse_q_cell

logger = logging.getLogger(__name__)

DEFAULT_ENGINE_NAME = "stockfish"


@dataclass(frozen=True)
class EngineConfig:
    """Engine launch command and search limits.

    Attributes:
        command: Launch command, or None to run from the cache only.
        name: Identity recorded in the cache and in reports.
        depth: Search depth in plies.
        movetime_ms: Search time per position in milliseconds, or None. When set,
            the search stops at whichever limit comes first.
        multipv: Lines requested per search.
        hash_mb: Hash table size.
        handshake_timeout: Seconds allowed for the UCI handshake.
        search_timeout: Seconds allowed per search, or None.
    """

    command: str | None = None
    name: str = DEFAULT_ENGINE_NAME
    depth: int = DEFAULT_DEPTH
    movetime_ms: int | None = None
    multipv: int = DEFAULT_MULTIPV
    hash_mb: int = DEFAULT_HASH_MB
    handshake_timeout: float = DEFAULT_HANDSHAKE_TIMEOUT
    search_timeout: float | None = None

    @property
    def limits(self) -> SearchLimits:
        """Return the search limits."""
        return SearchLimits(
            depth=self.depth,
            movetime_ms=self.movetime_ms,
            multipv=self.multipv,
            timeout_s=self.search_timeout,
        )

    @property
    def options(self) -> EngineOptions:
        """Return the options applied after the handshake."""
        return EngineOptions(hash_mb=self.hash_mb, handshake_timeout=self.handshake_timeout)


@dataclass(frozen=True)
class CorpusConfig:
    """Where human games come from and how they are queried.

    Attributes:
        paths: PGN files or directories to index.
        index: Prebuilt index file; preferred over ``paths`` when set.
        max_ply: Plies indexed per game.
        min_games: Fewest games that must reach a branch position.
        smoothing: Additive pseudo-count per legal move.
    """

    paths: tuple[Path, ...] = ()
    index: Path | None = None
    max_ply: int = DEFAULT_MAX_PLY
    min_games: int = DEFAULT_MIN_GAMES
    smoothing: float = 0.0

    @property
    def configured(self) -> bool:
        """Return whether any corpus source is set."""
        return self.index is not None or bool(self.paths)


@dataclass(frozen=True)
class ReportConfig:
    """Report output settings.

    Attributes:
        mode: Probability mode used for headline numbers.
        out: Output directory.
        cache: Evaluation cache file, or None for an in-memory cache.
    """

    mode: str = "renorm"
    out: Path = Path("output")
    cache: Path | None = None


@dataclass(frozen=True)
class RunConfig:
    """Everything a run needs.

    Attributes:
        engine: Engine settings.
        corpus: Corpus settings.
        report: Output settings.
        gambits: Gambit lines in file order.
        references: Published values per gambit name.
        source: File the configuration was read from.
    """

    engine: EngineConfig = field(default_factory=EngineConfig)
    corpus: CorpusConfig = field(default_factory=CorpusConfig)
    report: ReportConfig = field(default_factory=ReportConfig)
    gambits: tuple[GambitSpec, ...] = ()
    references: dict[str, ReferenceValues] = field(default_factory=dict)
    source: Path | None = None

    def gambit(self, name: str) -> GambitSpec:
        """Return the gambit with the given name.

        Raises:
            ConfigError: If no gambit has that name.
        """
        for spec in self.gambits:
            if spec.name == name:
                return spec
        known = ", ".join(spec.name for spec in self.gambits)
        msg = f"Unknown gambit {name!r}; configured: {known}"
        raise ConfigError(msg)

    def with_overrides(
        self,
        *,
        engine: dict[str, Any] | None = None,
        corpus: dict[str, Any] | None = None,
        report: dict[str, Any] | None = None,
    ) -> RunConfig:
        """Return a copy with command-line overrides applied.

        Only keys whose value is not None are applied.

        Raises:
            ConfigError: If an override has an invalid value.
        """
        updated = replace(
            self,
            engine=replace(self.engine, **_present(engine)),
            corpus=replace(self.corpus, **_present(corpus)),
            report=replace(self.report, **_present(report)),
        )
        _validate(updated)
        return updated


def _present(values: dict[str, Any] | None) -> dict[str, Any]:
    return {key: value for key, value in (values or {}).items() if value is not None}


def _validate(config: RunConfig) -> None:
    if config.report.mode not in PROBABILITY_MODES:
        msg = f"Probability mode must be one of {PROBABILITY_MODES}, got {config.report.mode!r}"
        raise ConfigError(msg)
    if config.engine.depth < 1:
        msg = f"Engine depth must be >= 1, got {config.engine.depth}"
        raise ConfigError(msg)
    if config.engine.movetime_ms is not None and config.engine.movetime_ms < 1:
        msg = f"Engine movetime_ms must be >= 1, got {config.engine.movetime_ms}"
        raise ConfigError(msg)
    if config.engine.multipv < 1:
        msg = f"multipv must be >= 1, got {config.engine.multipv}"
        raise ConfigError(msg)
    if config.corpus.min_games < 0 or config.corpus.smoothing < 0:
        msg = "Corpus min_games and smoothing must be non-negative"
        raise ConfigError(msg)
    names = [spec.name for spec in config.gambits]
    duplicates = sorted({name for name in names if names.count(name) > 1})
    if duplicates:
        msg = f"Duplicate gambit names: {duplicates}"
        raise ConfigError(msg)


def _section(data: dict[str, Any], name: str) -> dict[str, Any]:
    section = data.get(name, {})
    if not isinstance(section, dict):
        msg = f"[{name}] must be a table"
        raise ConfigError(msg)
    return section


def _check_keys(section: dict[str, Any], allowed: set[str], where: str) -> None:
    unknown = sorted(set(section) - allowed)
    if unknown:
        msg = f"Unknown keys in {where}: {unknown}"
        raise ConfigError(msg)


def _resolve(base: Path | None, value: str) -> Path:
    path = Path(value).expanduser()
    if base is not None and not path.is_absolute():
        return base / path
    return path


def _parse_gambiteer(value: str, where: str) -> chess.Color:
    if value not in chess.COLOR_NAMES:
        msg = f"{where}: gambiteer must be 'white' or 'black', got {value!r}"
        raise ConfigError(msg)
    return value == "white"


def _parse_reference(data: dict[str, Any], where: str) -> ReferenceValues:
    _check_keys(
        data,
        {
            "current_q",
            "pre_gambit_q",
            "initial_q",
            "skewness",
            "volatility",
            "q_values",
            "probabilities",
            "win_probabilities",
        },
        where,
    )
    q_values = tuple(str(cell) for cell in data.get("q_values", ()))
    probabilities = tuple(float(p) for p in data.get("probabilities", ()))
    win_probabilities = tuple(float(w) for w in data.get("win_probabilities", ()))
    if not len(q_values) == len(probabilities) == len(win_probabilities):
        msg = f"{where}: q_values, probabilities and win_probabilities differ in length"
        raise ConfigError(msg)
    try:
        for cell in q_values:
            parse_q_cell(cell)
    except ValueError as e:
        msg = f"{where}: bad Q cell: {e}"
        raise ConfigError(msg) from e

    def number(key: str) -> float | None:
        value = data.get(key)
        return None if value is None else float(value)

    return ReferenceValues(
        current_q=number("current_q"),
        pre_gambit_q=number("pre_gambit_q"),
        initial_q=number("initial_q"),
        skewness=number("skewness"),
        volatility=number("volatility"),
        q_values=q_values,
        probabilities=probabilities,
        win_probabilities=win_probabilities,
    )


def _parse_gambit(data: dict[str, Any], position: int) -> tuple[GambitSpec, ReferenceValues | None]:
    where = f"gambit #{position}"
    _check_keys(
        data,
        {
            "name",
            "opening",
            "title",
            "movetext",
            "gambit_ply",
            "gambiteer",
            "continuations",
            "k",
            "reference",
        },
        where,
    )
    missing = sorted({"name", "movetext", "gambit_ply", "gambiteer"} - set(data))
    if missing:
        msg = f"{where}: missing {missing}"
        raise ConfigError(msg)
    where = f"gambit {data['name']!r}"
    continuations = tuple(str(san) for san in data.get("continuations", ()))
    try:
        spec = GambitSpec(
            name=str(data["name"]),
            movetext=str(data["movetext"]),
            gambit_ply=int(data["gambit_ply"]),
            gambiteer=_parse_gambiteer(str(data["gambiteer"]), where),
            opening=str(data.get("opening", "")),
            title=str(data.get("title", "")),
            continuations=continuations,
            k=int(data.get("k", len(continuations) or DEFAULT_CONTINUATIONS)),
        )
    except InvalidGambitError as e:
        raise ConfigError(str(e)) from e
    if spec.k < 0:
        msg = f"{where}: k must be non-negative"
        raise ConfigError(msg)
    reference = data.get("reference")
    if reference is None:
        return spec, None
    if not isinstance(reference, dict):
        msg = f"{where}: reference must be a table"
        raise ConfigError(msg)
    return spec, _parse_reference(reference, f"{where} reference")


def parse_config(data: dict[str, Any], base: Path | None = None) -> RunConfig:
    """Build a run configuration from parsed TOML.

    Args:
        data: Parsed TOML document.
        base: Directory relative paths are resolved against.

    Returns:
        The validated configuration.

    Raises:
        ConfigError: On unknown keys, bad values or invalid gambit lines.
    """
    _check_keys(data, {"engine", "corpus", "report", "gambit"}, "configuration")
    engine = _section(data, "engine")
    corpus = _section(data, "corpus")
    report = _section(data, "report")
    _check_keys(
        engine,
        {
            "command",
            "name",
            "depth",
            "movetime_ms",
            "multipv",
            "hash_mb",
            "handshake_timeout",
            "search_timeout",
        },
        "[engine]",
    )
    _check_keys(corpus, {"paths", "index", "max_ply", "min_games", "smoothing"}, "[corpus]")
    _check_keys(report, {"mode", "out", "cache"}, "[report]")

    try:
        engine_config = EngineConfig(
            command=engine.get("command"),
            name=str(engine.get("name", DEFAULT_ENGINE_NAME)),
            depth=int(engine.get("depth", DEFAULT_DEPTH)),
            movetime_ms=(
                None if engine.get("movetime_ms") is None else int(engine["movetime_ms"])
            ),
            multipv=int(engine.get("multipv", DEFAULT_MULTIPV)),
            hash_mb=int(engine.get("hash_mb", DEFAULT_HASH_MB)),
            handshake_timeout=float(engine.get("handshake_timeout", DEFAULT_HANDSHAKE_TIMEOUT)),
            search_timeout=(
                None if engine.get("search_timeout") is None else float(engine["search_timeout"])
            ),
        )
        corpus_config = CorpusConfig(
            paths=tuple(_resolve(base, p) for p in corpus.get("paths", ())),
            index=None if corpus.get("index") is None else _resolve(base, corpus["index"]),
            max_ply=int(corpus.get("max_ply", DEFAULT_MAX_PLY)),
            min_games=int(corpus.get("min_games", DEFAULT_MIN_GAMES)),
            smoothing=float(corpus.get("smoothing", 0.0)),
        )
        report_config = ReportConfig(
            mode=str(report.get("mode", "renorm")),
            out=_resolve(base, report.get("out", "output")),
            cache=None if report.get("cache") is None else _resolve(base, report["cache"]),
        )
    except (TypeError, ValueError) as e:
        msg = f"Invalid configuration value: {e}"
        raise ConfigError(msg) from e

    blocks = data.get("gambit", [])
    if not isinstance(blocks, list):
        msg = "[[gambit]] must be an array of tables"
        raise ConfigError(msg)
    gambits: list[GambitSpec] = []
    references: dict[str, ReferenceValues] = {}
    for position, block in enumerate(blocks, start=1):
        spec, reference = _parse_gambit(block, position)
        gambits.append(spec)
        if reference is not None:
            references[spec.name] = reference

    config = RunConfig(engine_config, corpus_config, report_config, tuple(gambits), references)
    _validate(config)
    return config


def load_config(path: str | Path | None = None) -> RunConfig:
    """Read a TOML configuration file.

    Args:
        path: Configuration file; the packaged default when None.

    Returns:
        The configuration. Relative paths resolve against the file's directory.

    Raises:
        ConfigError: If the file cannot be read or is invalid.
    """
    if path is None:
        data_file = resources.files("gambit_lab").joinpath("data/gambits.toml")
        text = data_file.read_text(encoding="utf-8")
        base = None
        source = None
    else:
        source = Path(path)
        try:
            text = source.read_text(encoding="utf-8")
        except OSError as e:
            msg = f"Cannot read configuration {source}: {e}"
            raise ConfigError(msg) from e
        base = source.parent
    try:
        data = tomllib.loads(text)
    except tomllib.TOMLDecodeError as e:
        msg = f"Invalid TOML in {source or 'default configuration'}: {e}"
        raise ConfigError(msg) from e
    config = replace(parse_config(data, base), source=source)
    logger.info("Loaded %d gambits from %s", len(config.gambits), source or "default configuration")
    return config
