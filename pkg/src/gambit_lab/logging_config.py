"""Logging configuration for Gambit Lab runs.

Console output goes to stderr so that reports printed on stdout stay
byte-identical between runs. The UCI traffic logged by ``chess.engine`` is
only shown when the console runs at DEBUG.
"""

from __future__ import annotations

import logging
import sys
from datetime import UTC, datetime
from pathlib import Path

LOG_FORMAT = "%(asctime)s | %(levelname)-8s | %(name)s | %(message)s"
DATE_FORMAT = "%Y-%m-%d %H:%M:%S"

# Third-party loggers that log every engine line at DEBUG
CHATTY_LOGGERS = ("chess.engine", "asyncio")


def level_for_verbosity(verbose: int) -> int:
    """Map a ``-v`` count to a console level: WARNING, INFO, then DEBUG."""
    if verbose <= 0:
        return logging.WARNING
    return logging.INFO if verbose == 1 else logging.DEBUG


def setup_logging(
    output_dir: str | Path | None = None,
    level: int = logging.INFO,
    *,
    log_to_console: bool = True,
    log_to_file: bool = True,
    run_name: str = "run",
) -> Path | None:
    """Configure the root logger for one run.

    Args:
        output_dir: Run output directory; log files go to its ``logs/``
            subdirectory (``./output/logs`` when None).
        level: Console level. The file handler always captures DEBUG.
        log_to_console: Whether to log to stderr.
        log_to_file: Whether to write ``gambit_lab_<run_name>_<UTC time>.log``.
        run_name: Command name used in the log file name.

    Returns:
        Path to the log file if file logging is enabled, else None.
    """
    log_dir = Path("./output/logs") if output_dir is None else Path(output_dir) / "logs"
    log_file = None
    if log_to_file:
        log_dir.mkdir(parents=True, exist_ok=True)
        timestamp = datetime.now(tz=UTC).strftime("%Y%m%d_%H%M%S")
        log_file = log_dir / f"gambit_lab_{run_name}_{timestamp}.log"

    root_logger = logging.getLogger()
    root_logger.setLevel(logging.DEBUG)
    root_logger.handlers.clear()
    formatter = logging.Formatter(fmt=LOG_FORMAT, datefmt=DATE_FORMAT)

    if log_to_console:
        console_handler = logging.StreamHandler(sys.stderr)
        console_handler.setLevel(level)
        console_handler.setFormatter(formatter)
        root_logger.addHandler(console_handler)

    if log_file is not None:
        file_handler = logging.FileHandler(log_file, encoding="utf-8")
        file_handler.setLevel(logging.DEBUG)
        file_handler.setFormatter(formatter)
        root_logger.addHandler(file_handler)

    for name in CHATTY_LOGGERS:
        logging.getLogger(name).setLevel(logging.DEBUG if level <= logging.DEBUG else logging.INFO)

    logging.getLogger(__name__).info(
        "Logging %s at %s", run_name, log_file if log_file else "console only"
    )
    return log_file
