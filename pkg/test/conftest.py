"""Shared pytest fixtures for the test suite.

Engine-backed tests run against the scripted mock engine, launched as a
subprocess of the current interpreter. Expensive artifacts (the reference
corpus and script) are built once per session.
"""

from __future__ import annotations

from pathlib import Path
from typing import TYPE_CHECKING

import pytest

from gambit_lab.pipeline.config import RunConfig, load_config
from test.helpers.reference_run import ReferenceRun, mock_command, write_reference_run

if TYPE_CHECKING:
    from collections.abc import Callable


@pytest.fixture(scope="session")
def default_config() -> RunConfig:
    """Load the packaged default configuration once per session.

    Returns:
        The default run configuration.
    """
    return load_config()


@pytest.fixture(scope="session")
def reference_run(
    tmp_path_factory: pytest.TempPathFactory, default_config: RunConfig
) -> ReferenceRun:
    """Build the hermetic reference run once per session.

    The run holds a mock engine script and a synthetic PGN corpus that
    reproduce the published tables, plus a configuration pointing at both.

    Returns:
        Paths of the reference run artifacts.
    """
    return write_reference_run(default_config, tmp_path_factory.mktemp("reference"))


@pytest.fixture
def mock_engine() -> Callable[..., str]:
    """Provide a factory for mock engine launch commands.

    Returns:
        ``mock_command``: pass a script path (or None) and optionally ``mute``.
    """
    return mock_command


@pytest.fixture
def test_output_dir(tmp_path: Path) -> Path:
    """Provide a temporary directory for test outputs.

    Args:
        tmp_path: pytest's built-in temp directory fixture.

    Returns:
        Path to a temporary directory for test file outputs.
    """
    output_dir = tmp_path / "test_output"
    output_dir.mkdir(exist_ok=True)
    return output_dir


@pytest.fixture
def fixtures_dir() -> Path:
    """Get the path to the test fixtures directory.

    Returns:
        Path to test/fixtures directory.
    """
    return Path(__file__).parent / "fixtures"
