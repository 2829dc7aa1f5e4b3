"""Analysis defaults, file-format versions and report column layouts."""

from __future__ import annotations

from typing import Final, TypedDict

# Engine search defaults: five continuations per gambit table
DEFAULT_DEPTH: Final = 20
DEFAULT_MULTIPV: Final = 5
DEFAULT_HASH_MB: Final = 64
DEFAULT_HANDSHAKE_TIMEOUT: Final = 10.0
MOCK_ENGINE_NAME: Final = "mock-oracle"

# Corpus defaults
DEFAULT_MAX_PLY: Final = 40
DEFAULT_MIN_GAMES: Final = 25
DEFAULT_CONTINUATIONS: Final = 5

# Index file: "<magic> <version> <sha256 of body>\n<json body>"
INDEX_MAGIC: Final = "gambit-lab-corpus-index"
INDEX_VERSION: Final = 2

# Evaluation cache columns, in file order
CACHE_COLUMNS: Final = ("key", "depth", "movetime", "engine", "kind", "value", "fen")

# Value iteration
VALUE_ITERATION_TOLERANCE: Final = 1e-11
VALUE_ITERATION_CAP: Final = 100_000

# Standard deviations at or below this are treated as zero (skewness := 0)
SIGMA_EPSILON: Final = 1e-12

# Reported skewness further than this from the reference value is flagged
SKEW_FLAG_THRESHOLD: Final = 0.05

# Tabulated win probabilities may differ from the logistic identity by rounding
WIN_PROB_TOLERANCE: Final = 0.02

PROBABILITY_MODES: Final = ("raw", "renorm")


class StatisticsRow(TypedDict):
    """Row of a per-gambit ``statistics.csv``.

    Attributes:
        mode: Probability mode ("raw" or "renorm").
        q_star: Probability-weighted mean continuation win probability.
        volatility: Weighted standard deviation of continuation win probabilities.
        skewness: Weighted third standardized moment of win probabilities.
        weighted_win_prob: Sum of probability times win probability.
        pawn_mean: Weighted mean continuation Q in pawns (NaN with a mate row).
        pawn_volatility: Weighted standard deviation in pawns (NaN with a mate row).
        pawn_skewness: Weighted skewness in pawns (NaN with a mate row).
    """

    mode: str
    q_star: float
    volatility: float
    skewness: float
    weighted_win_prob: float
    pawn_mean: float
    pawn_volatility: float
    pawn_skewness: float


CONTINUATION_COLUMNS: Final = (
    "move",
    "q_value",
    "player_probability",
    "renorm_probability",
    "win_probability",
    "count",
)

Q_SERIES_COLUMNS: Final = ("ply", "move", "side", "q_value", "win_probability", "kind")

RANKING_INITIAL_Q_COLUMNS: Final = ("rank", "name", "opening", "gambiteer", "initial_q")

RANKING_SKEW_COLUMNS: Final = (
    "rank",
    "name",
    "skewness",
    "volatility",
    "reference_skewness",
    "reference_volatility",
    "delta_skewness",
    "skew_flag",
)
