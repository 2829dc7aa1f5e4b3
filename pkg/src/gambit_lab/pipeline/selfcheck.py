"""Embedded property checks run by ``gambit-lab selfcheck``.

Each check returns a verdict and a one-line detail. Output carries no timings,
so two runs print the same text.
"""

from __future__ import annotations

import logging
import math
from dataclasses import dataclass
from importlib import resources
from typing import TYPE_CHECKING

import numpy as np

from gambit_lab.board import Position, perft
from gambit_lab.constants import WIN_PROB_TOLERANCE
from gambit_lab.errors import GambitLabError
from gambit_lab.eval_model import cp_to_winprob, win_probability_of, winprob_to_cp
from gambit_lab.file_utils import timeit
from gambit_lab.mdp.fixture_io import parse_mdp
from gambit_lab.mdp.tabular import (
    bellman_residual,
    find_gambit_actions,
    policy_enumeration_oracle,
    random_mdp,
    solve,
)
from gambit_lab.metrics.moments import weighted_moments
from gambit_lab.pipeline.config import load_config

if TYPE_CHECKING:
    from collections.abc import Callable

logger = logging.getLogger(__name__)

SEED = 20_240_101
PERFT_STARTPOS = {1: 20, 2: 400, 3: 8902}
SEEDED_GAMBIT_ACTIONS = [(0, 1)]


@dataclass(frozen=True)
class CheckResult:
    """Verdict of one check.

    Attributes:
        name: Check name.
        passed: Whether the check passed.
        detail: One-line description of what was measured.
    """

    name: str
    passed: bool
    detail: str

    def __str__(self) -> str:
        """Render as "PASS name: detail"."""
        return f"{'PASS' if self.passed else 'FAIL'} {self.name}: {self.detail}"


def check_cp_to_winprob() -> tuple[bool, str]:
    """A fifth of a pawn is worth about 52.6% (within [0.523, 0.529])."""
    w = float(cp_to_winprob(0.2))
    return 0.523 <= w <= 0.529, f"cp_to_winprob(0.2) = {w:.4f}"  # noqa: PLR2004


def check_winprob_roundtrip() -> tuple[bool, str]:
    """Win probability to pawns and back is exact to 1e-12."""
    grid = np.linspace(0.01, 0.99, 99)
    error = max(abs(float(cp_to_winprob(winprob_to_cp(w))) - w) for w in grid)
    return error < 1e-12, f"max roundtrip error {error:.2e} over 99 points"  # noqa: PLR2004


def check_table_fidelity() -> tuple[bool, str]:
    """Published Q-values and win probabilities agree with the conversion."""
    config = load_config()
    worst = 0.0
    cells = 0
    for reference in config.references.values():
        for q, w in zip(reference.continuation_values, reference.win_probabilities, strict=True):
            worst = max(worst, abs(float(win_probability_of(q)) - w))
            cells += 1
    return worst <= WIN_PROB_TOLERANCE, f"{cells} cells, worst difference {worst:.4f}"


def _brute_force(p: list[float], x: list[float]) -> tuple[float, float, float]:
    mean = math.fsum(pi * xi for pi, xi in zip(p, x, strict=True))
    sigma = math.sqrt(math.fsum(pi * (xi - mean) ** 2 for pi, xi in zip(p, x, strict=True)))
    if sigma <= 1e-12:  # noqa: PLR2004
        return mean, 0.0, 0.0
    skew = math.fsum(pi * ((xi - mean) / sigma) ** 3 for pi, xi in zip(p, x, strict=True))
    return mean, sigma, skew


def check_moment_oracle() -> tuple[bool, str]:
    """Weighted moments equal direct summation on random distributions."""
    rng = np.random.default_rng(SEED)
    worst = 0.0
    for _ in range(1000):
        n = int(rng.integers(1, 9))
        p = rng.dirichlet(np.ones(n)).tolist()
        x = rng.random(n).tolist()
        moments = weighted_moments(p, x)
        expected = _brute_force(p, x)
        computed = (moments.mean, moments.sigma, moments.skewness)
        worst = max(
            worst,
            *(abs(c - e) / max(1.0, abs(e)) for c, e in zip(computed, expected, strict=True)),
        )
    symmetric = abs(weighted_moments([0.25, 0.5, 0.25], [0.2, 0.5, 0.8]).skewness)
    passed = worst < 1e-12 and symmetric < 1e-12  # noqa: PLR2004
    detail = f"1000 distributions, worst difference {worst:.2e}, symmetric skew {symmetric:.1e}"
    return passed, detail


def check_mdp_oracle() -> tuple[bool, str]:
    """Value iteration matches exhaustive policy enumeration."""
    rng = np.random.default_rng(SEED)
    worst_value = 0.0
    worst_residual = 0.0
    for _ in range(200):
        mdp = random_mdp(rng, int(rng.integers(1, 5)), int(rng.integers(1, 4)))
        q = solve(mdp)
        values, _ = policy_enumeration_oracle(mdp)
        worst_value = max(worst_value, float(np.max(np.abs(q.value - values))))
        worst_residual = max(worst_residual, bellman_residual(mdp, q))
    passed = worst_value < 1e-8 and worst_residual < 1e-10  # noqa: PLR2004
    return passed, f"200 MDPs, worst value gap {worst_value:.1e}, residual {worst_residual:.1e}"


def check_seeded_gambit() -> tuple[bool, str]:
    """The shipped seeded MDP has exactly its one gambit action."""
    data = resources.files("gambit_lab").joinpath("data/seeded_gambit.mdp")
    mdp = parse_mdp(data.read_text(encoding="utf-8"))
    found = find_gambit_actions(mdp, solve(mdp))
    return found == SEEDED_GAMBIT_ACTIONS, f"gambit actions {found}"


def check_perft() -> tuple[bool, str]:
    """Move generation counts from the initial position."""
    counts = {depth: perft(Position.startpos(), depth) for depth in PERFT_STARTPOS}
    return counts == PERFT_STARTPOS, f"perft {list(counts.values())}"


def check_mainlines() -> tuple[bool, str]:
    """Every configured mainline parses with a consistent gambit ply."""
    config = load_config()
    plies = sum(len(spec.mainline) for spec in config.gambits)
    return bool(config.gambits), f"{len(config.gambits)} lines, {plies} plies"


CHECKS: tuple[tuple[str, Callable[[], tuple[bool, str]]], ...] = (
    ("cp_to_winprob", check_cp_to_winprob),
    ("winprob_roundtrip", check_winprob_roundtrip),
    ("table_fidelity", check_table_fidelity),
    ("moment_oracle", check_moment_oracle),
    ("mdp_oracle", check_mdp_oracle),
    ("seeded_gambit", check_seeded_gambit),
    ("perft", check_perft),
    ("mainlines", check_mainlines),
)


@timeit
def run_selfcheck() -> list[CheckResult]:
    """Run every check; an exception inside a check counts as a failure.

    Returns:
        One result per check, in a fixed order.
    """
    results = []
    for name, check in CHECKS:
        try:
            passed, detail = check()
        except (GambitLabError, ArithmeticError, ValueError) as e:
            passed, detail = False, f"raised {type(e).__name__}: {e}"
        if not passed:
            logger.warning("Self-check %s failed: %s", name, detail)
        results.append(CheckResult(name, passed, detail))
    return results
