"""Finite MDPs with exact Bellman solutions.

Q-values follow ``Q(s, a) = u(s, a) + discount * sum_s' P(s' | s, a) * V(s')``
with ``V(s) = max_a Q(s, a)`` and ``V = 0`` at terminal states. Arrays are padded
to the largest action count; padded entries are masked out.
"""

from __future__ import annotations

import itertools
import logging
import math
from dataclasses import dataclass, field, replace
from functools import cached_property
from typing import TYPE_CHECKING

import numpy as np

from gambit_lab.constants import VALUE_ITERATION_CAP, VALUE_ITERATION_TOLERANCE
from gambit_lab.errors import MdpError, NonConvergenceError
from gambit_lab.metrics.moments import Moments, weighted_moments

if TYPE_CHECKING:
    from collections.abc import Sequence

logger = logging.getLogger(__name__)

ROW_SUM_TOLERANCE = 1e-12


@dataclass(frozen=True)
class Action:
    """One action available in a state.

    Attributes:
        name: Action label, unique within its state.
        utility: Instantaneous utility u(s, a).
        transitions: (successor state, probability) pairs.
    """

    name: str
    utility: float
    transitions: tuple[tuple[int, float], ...]


@dataclass(frozen=True)
class TabularMDP:
    """A finite MDP.

    Attributes:
        n_states: Number of states, labeled 0..n_states-1.
        actions: Actions per state; terminal states have none.
        terminal: Terminal states.
        discount: Discount factor in (0, 1].
        horizon: Number of decision stages for backward induction, or None
            to solve for the stationary fixed point.
    """

    n_states: int
    actions: tuple[tuple[Action, ...], ...]
    terminal: frozenset[int] = field(default_factory=frozenset)
    discount: float = 1.0
    horizon: int | None = None

    def __post_init__(self) -> None:
        """Validate shapes, probabilities and terminal states.

        Raises:
            MdpError: If any structural invariant fails.
        """
        if self.n_states < 1:
            msg = f"An MDP needs at least one state, got {self.n_states}"
            raise MdpError(msg)
        if len(self.actions) != self.n_states:
            msg = f"Got action sets for {len(self.actions)} of {self.n_states} states"
            raise MdpError(msg)
        if not 0.0 < self.discount <= 1.0:
            msg = f"Discount must lie in (0, 1], got {self.discount}"
            raise MdpError(msg)
        if self.horizon is not None and self.horizon < 0:
            msg = f"Horizon must be non-negative, got {self.horizon}"
            raise MdpError(msg)
        for s in self.terminal:
            if not 0 <= s < self.n_states:
                msg = f"Terminal state {s} out of range"
                raise MdpError(msg)
        for s, state_actions in enumerate(self.actions):
            self._validate_state(s, state_actions)

    def _validate_state(self, s: int, state_actions: tuple[Action, ...]) -> None:
        if s in self.terminal:
            if state_actions:
                msg = f"Terminal state {s} has actions"
                raise MdpError(msg)
            return
        if not state_actions:
            msg = f"Non-terminal state {s} has no actions"
            raise MdpError(msg)
        names = [action.name for action in state_actions]
        if len(set(names)) != len(names):
            msg = f"State {s} repeats an action name: {names}"
            raise MdpError(msg)
        for action in state_actions:
            total = 0.0
            for successor, probability in action.transitions:
                if not 0 <= successor < self.n_states:
                    msg = f"State {s} action {action.name}: successor {successor} out of range"
                    raise MdpError(msg)
                if probability < 0:
                    msg = f"State {s} action {action.name}: negative probability {probability}"
                    raise MdpError(msg)
                total += probability
            if abs(total - 1.0) > ROW_SUM_TOLERANCE:
                msg = f"State {s} action {action.name}: probabilities sum to {total!r}"
                raise MdpError(msg)

    @property
    def max_actions(self) -> int:
        """Return the largest action count of any state."""
        return max((len(a) for a in self.actions), default=0)

    @cached_property
    def mask(self) -> np.ndarray:
        """Return the (states, actions) mask of real actions."""
        mask = np.zeros((self.n_states, max(self.max_actions, 1)), dtype=bool)
        for s, state_actions in enumerate(self.actions):
            mask[s, : len(state_actions)] = True
        return mask

    @cached_property
    def utility(self) -> np.ndarray:
        """Return u(s, a) as a padded (states, actions) array."""
        utility = np.zeros(self.mask.shape)
        for s, state_actions in enumerate(self.actions):
            for a, action in enumerate(state_actions):
                utility[s, a] = action.utility
        return utility

    @cached_property
    def transitions(self) -> np.ndarray:
        """Return P(s' | s, a) as a padded (states, actions, states) array."""
        p = np.zeros((*self.mask.shape, self.n_states))
        for s, state_actions in enumerate(self.actions):
            for a, action in enumerate(state_actions):
                for successor, probability in action.transitions:
                    p[s, a, successor] += probability
        return p

    def action_index(self, s: int, name: str) -> int:
        """Return the index of a named action in state ``s``.

        Raises:
            MdpError: If the state has no such action.
        """
        for a, action in enumerate(self.actions[s]):
            if action.name == name:
                return a
        msg = f"State {s} has no action {name!r}"
        raise MdpError(msg)

    def scaled(self, factor: float) -> TabularMDP:
        """Return a copy with every utility multiplied by ``factor``."""
        actions = tuple(
            tuple(replace(action, utility=action.utility * factor) for action in state_actions)
            for state_actions in self.actions
        )
        return replace(self, actions=actions)

    def relabeled(self, permutation: Sequence[int]) -> TabularMDP:
        """Return the same MDP with state ``s`` renamed to ``permutation[s]``.

        Raises:
            MdpError: If ``permutation`` is not a permutation of the states.
        """
        if sorted(permutation) != list(range(self.n_states)):
            msg = f"Not a permutation of {self.n_states} states: {list(permutation)}"
            raise MdpError(msg)
        actions: list[tuple[Action, ...]] = [()] * self.n_states
        for s, state_actions in enumerate(self.actions):
            actions[permutation[s]] = tuple(
                replace(
                    action,
                    transitions=tuple((permutation[t], p) for t, p in action.transitions),
                )
                for action in state_actions
            )
        terminal = frozenset(permutation[s] for s in self.terminal)
        return replace(self, actions=tuple(actions), terminal=terminal)


@dataclass(frozen=True, eq=False)
class QTable:
    """Q-values of a solved MDP.

    Attributes:
        values: Padded (states, actions) Q-values; padded entries are -inf.
    """

    values: np.ndarray

    @cached_property
    def value(self) -> np.ndarray:
        """Return V(s) = max_a Q(s, a), with 0 at states without actions."""
        best = self.values.max(axis=1)
        return np.where(np.isneginf(best), 0.0, best)

    @cached_property
    def policy(self) -> np.ndarray:
        """Return a*(s), the lowest-index argmax, with -1 at states without actions."""
        best = np.argmax(self.values, axis=1)
        return np.where(np.isneginf(self.values.max(axis=1)), -1, best)

    def q(self, s: int, a: int) -> float:
        """Return Q(s, a)."""
        return float(self.values[s, a])


def _backup(mdp: TabularMDP, v: np.ndarray) -> np.ndarray:
    q = mdp.utility + mdp.discount * (mdp.transitions @ v)
    return np.where(mdp.mask, q, -np.inf)


def _values_of(mdp: TabularMDP, q: np.ndarray) -> np.ndarray:
    best = np.where(mdp.mask, q, -np.inf).max(axis=1)
    return np.where(np.isneginf(best), 0.0, best)


def solve(mdp: TabularMDP) -> QTable:
    """Solve the Bellman equation.

    With a horizon the MDP is solved by backward induction over that many
    stages; otherwise value iteration runs until successive Q tables differ by
    less than ``VALUE_ITERATION_TOLERANCE`` in sup-norm.

    Args:
        mdp: The MDP.

    Returns:
        The Q table.

    Raises:
        NonConvergenceError: If value iteration hits ``VALUE_ITERATION_CAP``.
    """
    v = np.zeros(mdp.n_states)
    if mdp.horizon is not None:
        q = np.where(mdp.mask, 0.0, -np.inf)
        for _ in range(mdp.horizon):
            q = _backup(mdp, v)
            v = _values_of(mdp, q)
        logger.debug("Backward induction over %d stages", mdp.horizon)
        return QTable(q)

    q = _backup(mdp, v)
    for iteration in range(1, VALUE_ITERATION_CAP + 1):
        updated = _backup(mdp, _values_of(mdp, q))
        delta = float(np.max(np.abs(updated[mdp.mask] - q[mdp.mask]), initial=0.0))
        q = updated
        if delta < VALUE_ITERATION_TOLERANCE:
            logger.debug("Value iteration converged after %d sweeps", iteration)
            return QTable(q)
    msg = (
        f"Value iteration did not converge in {VALUE_ITERATION_CAP} sweeps"
        f" (last change {delta:.3g})"
    )
    raise NonConvergenceError(msg)


def bellman_residual(mdp: TabularMDP, q: QTable) -> float:
    """Return the sup-norm distance between a Q table and its Bellman backup.

    Raises:
        ValueError: If the table does not match the MDP's shape.
    """
    if q.values.shape != mdp.mask.shape:
        msg = f"Q table shape {q.values.shape} does not match MDP shape {mdp.mask.shape}"
        raise ValueError(msg)
    backup = _backup(mdp, _values_of(mdp, q.values))
    if not mdp.mask.any():
        return 0.0
    return float(np.max(np.abs(q.values[mdp.mask] - backup[mdp.mask])))


def find_gambit_actions(mdp: TabularMDP, q: QTable) -> list[tuple[int, int]]:
    """Find actions that lose value now but only lead to winning states.

    Args:
        mdp: The MDP.
        q: Its solved Q table.

    Returns:
        (state, action index) pairs with Q(s, a) < 0 whose every reachable
        successor has V(s') > 0, in state then action order.
    """
    v = q.value
    found: list[tuple[int, int]] = []
    for s, a in zip(*np.nonzero(mdp.mask), strict=True):
        if q.values[s, a] >= 0:
            continue
        successors = np.nonzero(mdp.transitions[s, a] > 0)[0]
        if successors.size and np.all(v[successors] > 0):
            found.append((int(s), int(a)))
    return found


def continuation_skew(mdp: TabularMDP, q: QTable, s: int, a: int) -> Moments:
    """Return the mean, volatility and skewness of successor values of an action.

    Raises:
        MdpError: If ``a`` is not an action of ``s``.
    """
    if not mdp.mask[s, a]:
        msg = f"State {s} has no action {a}"
        raise MdpError(msg)
    p = mdp.transitions[s, a]
    successors = np.nonzero(p > 0)[0]
    return weighted_moments(p[successors].tolist(), q.value[successors].tolist())


def policy_enumeration_oracle(mdp: TabularMDP) -> tuple[np.ndarray, tuple[int, ...]]:
    """Find the best stationary policy by trying all of them.

    Each deterministic policy is evaluated exactly with a linear solve, so the
    MDP must be discounted.

    Args:
        mdp: A discounted MDP without a horizon.

    Returns:
        The optimal state values and the policy (-1 at terminal states).

    Raises:
        MdpError: If the MDP is undiscounted or has a horizon.
    """
    if mdp.discount >= 1.0 or mdp.horizon is not None:
        msg = "Policy enumeration needs a discount below 1 and no horizon"
        raise MdpError(msg)
    n = mdp.n_states
    choices = [
        range(len(state_actions)) if state_actions else [-1] for state_actions in mdp.actions
    ]
    best_values = np.zeros(n)
    best_policy: tuple[int, ...] = ()
    best_total = -math.inf
    for policy in itertools.product(*choices):
        a = np.eye(n)
        b = np.zeros(n)
        for s, action in enumerate(policy):
            if action < 0:
                continue
            a[s] -= mdp.discount * mdp.transitions[s, action]
            b[s] = mdp.utility[s, action]
        values = np.linalg.solve(a, b)
        total = float(values.sum())
        if total > best_total + 1e-12:
            best_values, best_policy, best_total = values, tuple(policy), total
    return best_values, best_policy


def random_mdp(
    rng: np.random.Generator,
    n_states: int = 4,
    n_actions: int = 3,
    discount: float = 0.9,
) -> TabularMDP:
    """Draw a random MDP with normal utilities and Dirichlet transition rows.

    Args:
        rng: Seeded generator.
        n_states: Number of states, none terminal.
        n_actions: Actions per state.
        discount: Discount factor.

    Returns:
        The MDP.
    """
    actions = []
    for _ in range(n_states):
        state_actions = []
        for a in range(n_actions):
            row = rng.dirichlet(np.ones(n_states))
            transitions = tuple((t, float(p)) for t, p in enumerate(row))
            state_actions.append(Action(f"a{a}", float(rng.normal()), transitions))
        actions.append(tuple(state_actions))
    return TabularMDP(n_states, tuple(actions), discount=discount)
