"""Exception hierarchy for Gambit Lab.

Every error raised by the package derives from ``GambitLabError``. Each family
also derives from the closest builtin so callers catching ``ValueError`` or
``RuntimeError`` keep working. The CLI maps families to exit codes through
each class's ``exit_code``.
"""

from __future__ import annotations


class GambitLabError(Exception):
    """Base class for all Gambit Lab errors."""

    exit_code: int = 1


# Configuration


class ConfigError(GambitLabError, ValueError):
    """Invalid or unreadable run configuration."""

    exit_code = 2


# Chess rules


class InvalidPositionError(GambitLabError, ValueError):
    """A board state that violates the position invariants."""


class IllegalMoveError(GambitLabError, ValueError):
    """A move that is not legal in the given position."""


# Notation


class NotationError(GambitLabError, ValueError):
    """Base class for FEN, SAN and PGN parse failures."""


class FenSyntaxError(NotationError):
    """Malformed FEN fields."""


class FenSemanticError(NotationError):
    """Well-formed FEN describing an impossible position."""


class SanSyntaxError(NotationError):
    """Token that is not syntactically SAN."""


class SanNoMatchError(NotationError):
    """SAN token that matches no legal move."""


class SanAmbiguousError(NotationError):
    """SAN token that needs a disambiguator it does not carry."""


class MainlineParseError(NotationError):
    """SAN failure inside a movetext, tagged with its 0-based ply index."""

    def __init__(self, ply: int, token: str, cause: NotationError) -> None:
        """Initialize the error.

        Args:
            ply: 0-based index of the failing token.
            token: The failing SAN token.
            cause: The underlying SAN error.
        """
        self.ply = ply
        self.token = token
        self.cause = cause
        super().__init__(f"ply {ply} ({token!r}): {cause}")


class PgnGameError(NotationError):
    """A single game in a PGN stream that could not be read."""

    def __init__(self, offset: int, message: str) -> None:
        """Initialize the error.

        Args:
            offset: Byte offset of the game's first line in the stream.
            message: Description of the failure.
        """
        self.offset = offset
        super().__init__(f"game at byte {offset}: {message}")


# Engine


class EngineError(GambitLabError, RuntimeError):
    """Base class for engine bridge failures."""

    exit_code = 3


class EngineLaunchError(EngineError):
    """The engine process could not be started."""


class HandshakeTimeoutError(EngineError):
    """The engine did not complete the UCI handshake in time."""


class ProtocolViolationError(EngineError):
    """The engine sent output that does not follow the protocol."""


class SearchTimeoutError(EngineError):
    """A search did not finish in time."""


class SessionDeadError(EngineError):
    """The engine process terminated or the session was closed."""


class SessionBusyError(EngineError):
    """A second search was requested while one is in flight."""


class CacheMissError(EngineError):
    """An evaluation is missing from the cache and no engine is configured."""


# Corpus


class CorpusError(GambitLabError, RuntimeError):
    """Base class for corpus ingestion and index failures."""

    exit_code = 4


class CorpusReadError(CorpusError):
    """A PGN input or index file could not be read."""


class InsufficientDataError(CorpusError):
    """Fewer games reached the position than the configured minimum."""


class EmptySupportError(CorpusError):
    """A restriction left no probability mass."""


class IndexVersionError(CorpusError):
    """An index file was written by an incompatible version."""


class IndexCorruptionError(CorpusError):
    """An index file failed its checksum or could not be decoded."""


# Metrics and mdp


class MetricsError(GambitLabError, ValueError):
    """Base class for gambit statistic failures."""


class EmptyRowsError(MetricsError):
    """A statistic was requested over no continuation rows."""


class UnitMismatchError(MetricsError):
    """Values in different units were combined."""


class PerspectiveMismatchError(MetricsError):
    """Values from different perspectives were combined."""


class WinProbBoundaryError(MetricsError):
    """Win probability of exactly 0 or 1 has no finite pawn advantage."""


class InvalidGambitError(MetricsError):
    """A gambit definition whose line or gambit ply is inconsistent."""


class MdpError(GambitLabError, ValueError):
    """Invalid tabular MDP."""


class NonConvergenceError(MdpError):
    """Value iteration hit its iteration cap."""


class AnalysisFailedError(GambitLabError):
    """One or more gambits in a ranking run failed."""

    exit_code = 5
