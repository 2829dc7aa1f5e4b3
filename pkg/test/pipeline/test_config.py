"""Tests for loading and overriding run configurations."""

from __future__ import annotations

from pathlib import Path
from typing import TYPE_CHECKING

import chess
import pytest

from gambit_lab.engine.scores import SearchLimits
from gambit_lab.errors import ConfigError
from gambit_lab.pipeline.config import load_config, parse_config

if TYPE_CHECKING:
    from gambit_lab.pipeline.config import RunConfig

MINIMAL_GAMBIT = {
    "name": "kings-gambit",
    "movetext": "1.e4 e5 2.f4",
    "gambit_ply": 3,
    "gambiteer": "white",
    "k": 0,
}


class TestDefaultConfig:
    """Tests for the packaged configuration."""

    def test_gambits(self, default_config: RunConfig) -> None:
        """Test the packaged gambit set."""
        assert len(default_config.gambits) == 15
        assert len(default_config.references) == 15
        assert default_config.gambits[0].name == "stafford-v1"
        assert default_config.gambit("halloween-v2").k == 5
        assert default_config.gambit("queens-gambit").k == 0

    def test_sections(self, default_config: RunConfig) -> None:
        """Test the engine, corpus and report defaults."""
        assert default_config.engine.command == "stockfish"
        assert default_config.engine.limits == SearchLimits(depth=20, multipv=5)
        assert default_config.corpus.min_games == 25
        assert not default_config.corpus.configured
        assert default_config.report.mode == "renorm"
        assert default_config.source is None

    def test_mate_cell(self, default_config: RunConfig) -> None:
        """Test that the Halloween mate cell is kept as text."""
        assert default_config.references["halloween-v1"].q_values[0] == "#5"

    def test_unknown_gambit(self, default_config: RunConfig) -> None:
        """Test that asking for an unconfigured gambit lists the known ones."""
        with pytest.raises(ConfigError, match="Unknown gambit 'jerome'.*stafford-v1"):
            default_config.gambit("jerome")


class TestParseConfig:
    """Tests for parse_config validation."""

    def test_unknown_key(self) -> None:
        """Test that misspelled keys are rejected."""
        with pytest.raises(ConfigError, match=r"Unknown keys in \[engine\]: \['dept'\]"):
            parse_config({"engine": {"dept": 20}})

    def test_unknown_section(self) -> None:
        """Test that unknown top-level tables are rejected."""
        with pytest.raises(ConfigError, match="Unknown keys in configuration"):
            parse_config({"engines": {}})

    def test_bad_value(self) -> None:
        """Test that a non-numeric depth is a configuration error."""
        with pytest.raises(ConfigError, match="Invalid configuration value"):
            parse_config({"engine": {"depth": "deep"}})

    def test_bad_mode(self) -> None:
        """Test that the probability mode is validated."""
        with pytest.raises(ConfigError, match="Probability mode"):
            parse_config({"report": {"mode": "smoothed"}})

    def test_gambit_missing_fields(self) -> None:
        """Test that gambits need a name, line, ply and gambiteer."""
        with pytest.raises(ConfigError, match=r"gambit #1: missing \['gambit_ply'"):
            parse_config({"gambit": [{"name": "x", "movetext": "1.e4"}]})

    def test_bad_gambiteer(self) -> None:
        """Test that the gambiteer must be a color name."""
        with pytest.raises(ConfigError, match="gambiteer must be"):
            parse_config({"gambit": [{**MINIMAL_GAMBIT, "gambiteer": "red"}]})

    def test_inconsistent_gambit(self) -> None:
        """Test that an invalid gambit line becomes a configuration error."""
        block = {**MINIMAL_GAMBIT, "gambiteer": "black", "movetext": "1.e4 e5 2.f4 d5"}
        with pytest.raises(ConfigError, match="not played by the gambiteer"):
            parse_config({"gambit": [block]})

    def test_duplicate_names(self) -> None:
        """Test that gambit names are unique."""
        with pytest.raises(ConfigError, match="Duplicate gambit names"):
            parse_config({"gambit": [MINIMAL_GAMBIT, MINIMAL_GAMBIT]})

    def test_reference_lengths(self) -> None:
        """Test that reference columns must have equal lengths."""
        reference = {"q_values": ["+0.10"], "probabilities": [0.5, 0.5], "win_probabilities": [0.5]}
        with pytest.raises(ConfigError, match="differ in length"):
            parse_config({"gambit": [{**MINIMAL_GAMBIT, "reference": reference}]})

    def test_minimal(self) -> None:
        """Test a configuration with a single gambit and no reference."""
        config = parse_config({"gambit": [MINIMAL_GAMBIT]})
        assert config.gambit("kings-gambit").gambiteer == chess.WHITE
        assert config.references == {}
        assert config.engine.command is None


class TestLoadConfig:
    """Tests for load_config and with_overrides."""

    def test_relative_paths(self, tmp_path: Path) -> None:
        """Test that paths resolve against the configuration's directory."""
        path = tmp_path / "run.toml"
        path.write_text(
            '[corpus]\npaths = ["games"]\nindex = "corpus.idx"\n[report]\nout = "out"\n'
        )
        config = load_config(path)
        assert config.corpus.paths == (tmp_path / "games",)
        assert config.corpus.index == tmp_path / "corpus.idx"
        assert config.report.out == tmp_path / "out"
        assert config.source == path

    def test_absolute_paths_kept(self, tmp_path: Path) -> None:
        """Test that absolute paths are not rebased."""
        path = tmp_path / "run.toml"
        path.write_text('[report]\nout = "/var/gambits"\n')
        assert load_config(path).report.out == Path("/var/gambits")

    def test_invalid_toml(self, tmp_path: Path) -> None:
        """Test that TOML syntax errors are configuration errors."""
        path = tmp_path / "run.toml"
        path.write_text("[engine\n")
        with pytest.raises(ConfigError, match="Invalid TOML"):
            load_config(path)

    def test_missing_file(self, tmp_path: Path) -> None:
        """Test that a missing file is a configuration error."""
        with pytest.raises(ConfigError, match="Cannot read configuration"):
            load_config(tmp_path / "absent.toml")

    def test_overrides(self, default_config: RunConfig) -> None:
        """Test that only given overrides are applied."""
        config = default_config.with_overrides(
            engine={"depth": 12, "command": None}, report={"mode": "raw"}
        )
        assert config.engine.depth == 12
        assert config.engine.command == "stockfish"
        assert config.report.mode == "raw"
        assert default_config.engine.depth == 20

    def test_invalid_override(self, default_config: RunConfig) -> None:
        """Test that overrides are validated."""
        with pytest.raises(ConfigError, match="multipv"):
            default_config.with_overrides(engine={"multipv": 0})

    def test_movetime(self, tmp_path: Path, default_config: RunConfig) -> None:
        """Test that a movetime reaches the search limits and is validated."""
        path = tmp_path / "run.toml"
        path.write_text("[engine]\ndepth = 18\nmovetime_ms = 250\n")
        limits = load_config(path).engine.limits
        assert (limits.depth, limits.movetime_ms) == (18, 250)
        assert default_config.engine.movetime_ms is None
        overridden = default_config.with_overrides(engine={"movetime_ms": 400})
        assert overridden.engine.limits.movetime_ms == 400
        with pytest.raises(ConfigError, match="movetime_ms"):
            default_config.with_overrides(engine={"movetime_ms": 0})
