"""Hermetic reference run: a mock engine script and a synthetic corpus.

The script makes the mock engine return the published Q-values at every
scripted position, and the corpus holds games whose reply counts reproduce
the published player probabilities. Running the pipeline over both recomputes
the published tables without a real engine or real games.
"""

from __future__ import annotations

import json
import shlex
import sys
from collections import Counter
from dataclasses import dataclass
from importlib import resources
from typing import TYPE_CHECKING

import chess

from gambit_lab.board import Position, apply_move, format_key, legal_moves, position_key
from gambit_lab.eval_model import MateFlag, PawnAdvantage
from gambit_lab.notation.pgn import GameRecord, GameResult, render_pgn
from gambit_lab.notation.san import parse_san, render_san

if TYPE_CHECKING:
    from pathlib import Path

    from gambit_lab.eval_model import GambiteerValue
    from gambit_lab.metrics.gambit import GambitSpec
    from gambit_lab.pipeline.config import RunConfig

# Games reaching each branch position. Lines whose branch is passed through by
# a longer line need more games so the longer line's replies fit in the counts.
BRANCH_GAMES = {"smith-morra-v1": 400, "danish-v1": 200}
DEFAULT_BRANCH_GAMES = 100

ENGINE_NAME = "mock-oracle"


@dataclass(frozen=True)
class ReferenceRun:
    """Artifacts of a reference run.

    Attributes:
        directory: Root of the run.
        config: TOML configuration using the mock engine and the corpus.
        cache_only_config: Same configuration without an engine command.
        script: Mock engine score table.
        corpus: Directory holding the synthetic PGN file.
    """

    directory: Path
    config: Path
    cache_only_config: Path
    script: Path
    corpus: Path


def mock_command(script: Path | None = None, *, mute: bool = False) -> str:
    """Return the launch command of the mock engine.

    Args:
        script: JSON score table, or None for an all-default engine.
        mute: Make the engine ignore the handshake.

    Returns:
        A shell-quoted command line.
    """
    argv = [sys.executable, "-m", "gambit_lab.engine.mock_engine"]
    if script is not None:
        argv += ["--script", str(script)]
    if mute:
        argv.append("--mute")
    return shlex.join(argv)


def script_entry(q: GambiteerValue, gambiteer: chess.Color, side_to_move: chess.Color) -> dict:
    """Convert a gambiteer-perspective Q-value to a side-to-move script entry."""
    sign = 1 if side_to_move == gambiteer else -1
    if isinstance(q, MateFlag):
        return {"mate": sign * (q.moves if q.winning else -q.moves)}
    return {"cp": round(sign * q.value * 100)}


def build_script(config: RunConfig) -> dict:
    """Build the mock engine score table for every gambit with reference values.

    Positions are keyed by position key. When two lines reach the same position
    the first configured line's value wins.

    Returns:
        Script with "default" and "positions".
    """
    positions: dict[str, dict] = {}

    def put(position: Position, q: GambiteerValue, spec: GambitSpec) -> None:
        key = format_key(position_key(position))
        if key not in positions:
            positions[key] = script_entry(q, spec.gambiteer, position.turn)

    for spec in config.gambits:
        reference = config.references.get(spec.name)
        if reference is None:
            continue
        mainline = spec.mainline
        scripted = (
            (spec.gambit_ply - 1, reference.pre_gambit_q),
            (spec.gambit_ply, reference.initial_q),
            (len(mainline), reference.current_q),
        )
        for ply, value in scripted:
            if value is not None:
                put(mainline.position_at(ply), PawnAdvantage(value), spec)
        branch = mainline.final
        for san, q in zip(spec.continuations, reference.continuation_values, strict=True):
            put(apply_move(branch, parse_san(branch, san)), q, spec)
    return {"default": {"cp": 0}, "positions": positions}


def _filler_move(branch: Position, excluded: set[str]) -> chess.Move:
    for move in sorted(legal_moves(branch), key=chess.Move.uci):
        if render_san(branch, move) not in excluded:
            return move
    msg = f"No filler move available in {branch.fen()}"
    raise ValueError(msg)


def build_corpus(config: RunConfig) -> list[GameRecord]:
    """Build games whose replies at each branch match the published probabilities.

    Longer lines are generated first; games of a longer line that pass through
    a shorter line's branch count toward that branch's totals.

    Returns:
        Games in generation order, each ending with result "*".
    """
    games: list[tuple[chess.Move, ...]] = []
    specs = sorted(
        (s for s in config.gambits if s.continuations and s.name in config.references),
        key=lambda s: (-len(s.mainline), s.name),
    )
    for spec in specs:
        reference = config.references[spec.name]
        mainline = spec.mainline
        prefix = tuple(move for _, move in mainline.steps)
        branch = mainline.final
        total = BRANCH_GAMES.get(spec.name, DEFAULT_BRANCH_GAMES)

        passing: Counter[chess.Move] = Counter(
            game[len(prefix)] for game in games if game[: len(prefix)] == prefix
        )
        moves = [parse_san(branch, san) for san in spec.continuations]
        own = {
            move: round(p * total) - passing.pop(move, 0)
            for move, p in zip(moves, reference.probabilities, strict=True)
        }
        filler = total - sum(round(p * total) for p in reference.probabilities)
        filler -= sum(passing.values())
        if filler < 0 or any(n < 0 for n in own.values()):
            msg = f"{spec.name}: {total} games cannot hold the published counts"
            raise ValueError(msg)
        own[_filler_move(branch, {render_san(branch, m) for m in moves})] = filler
        for move, n in own.items():
            games.extend([(*prefix, move)] * n)

    start = Position.startpos()
    return [
        GameRecord(
            headers={"Event": "reference", "Round": str(number)},
            start=start,
            moves=moves,
            result=GameResult.UNKNOWN,
        )
        for number, moves in enumerate(games, start=1)
    ]


def _engine_section(command: str | None) -> str:
    lines = ["[engine]"]
    if command is not None:
        lines.append(f"command = {json.dumps(command)}")
    lines += [f'name = "{ENGINE_NAME}"', "depth = 20", "multipv = 5"]
    return "\n".join(lines) + "\n"


def _configuration(command: str | None) -> str:
    data = resources.files("gambit_lab").joinpath("data/gambits.toml")
    packaged = data.read_text(encoding="utf-8")
    gambits = packaged[packaged.index("[[gambit]]") :]
    return (
        _engine_section(command)
        + '\n[corpus]\npaths = ["corpus"]\nmin_games = 25\n'
        + '\n[report]\nmode = "renorm"\nout = "output"\ncache = "cache.csv"\n\n'
        + gambits
    )


def write_reference_run(config: RunConfig, directory: Path) -> ReferenceRun:
    """Write the script, corpus and configurations of a reference run.

    Args:
        config: Configuration whose gambits and references are reproduced.
        directory: Empty directory to write into.

    Returns:
        The written artifact paths.
    """
    script = directory / "script.json"
    script.write_text(json.dumps(build_script(config), indent=2, sort_keys=True), encoding="utf-8")

    corpus = directory / "corpus"
    corpus.mkdir()
    (corpus / "reference.pgn").write_text(
        "".join(render_pgn(record) for record in build_corpus(config)), encoding="utf-8"
    )

    run_config = directory / "gambit_lab.toml"
    run_config.write_text(_configuration(mock_command(script)), encoding="utf-8")
    cache_only = directory / "cache_only.toml"
    cache_only.write_text(_configuration(None), encoding="utf-8")
    return ReferenceRun(directory, run_config, cache_only, script, corpus)
