"""Plain-text MDP fixture files.

One directive per line, ``#`` starts a comment::

    states 5
    discount 1.0
    horizon 3
    terminal 4
    action 0 solid 0.2 4:1.0
    action 0 gambit -1.0 1:0.5 2:0.5

``action <state> <name> <utility> <successor>:<probability> ...`` adds an
action; actions keep file order. ``discount`` defaults to 1 and ``horizon`` is
optional. ``terminal`` may list several states.
"""

from __future__ import annotations

import logging
from pathlib import Path

from gambit_lab.errors import MdpError
from gambit_lab.file_utils import write_to_file
from gambit_lab.mdp.tabular import Action, TabularMDP

logger = logging.getLogger(__name__)

DIRECTIVES = frozenset({"states", "discount", "horizon", "terminal", "action"})


def _fail(number: int, message: str) -> MdpError:
    return MdpError(f"line {number}: {message}")


def parse_mdp(text: str) -> TabularMDP:
    """Parse an MDP fixture.

    Args:
        text: Fixture contents.

    Returns:
        The validated MDP.

    Raises:
        MdpError: On unknown directives, malformed values or an invalid MDP.
    """
    n_states: int | None = None
    discount = 1.0
    horizon: int | None = None
    terminal: set[int] = set()
    actions: dict[int, list[Action]] = {}

    for number, raw in enumerate(text.splitlines(), start=1):
        line = raw.split("#", 1)[0].strip()
        if not line:
            continue
        directive, *args = line.split()
        if directive not in DIRECTIVES:
            raise _fail(number, f"unknown directive {directive!r}")
        try:
            if directive == "states":
                n_states = int(args[0])
            elif directive == "discount":
                discount = float(args[0])
            elif directive == "horizon":
                horizon = int(args[0])
            elif directive == "terminal":
                terminal.update(int(arg) for arg in args)
            else:
                state, name, utility, *pairs = args
                transitions = []
                for pair in pairs:
                    successor, probability = pair.split(":")
                    transitions.append((int(successor), float(probability)))
                actions.setdefault(int(state), []).append(
                    Action(name, float(utility), tuple(transitions))
                )
        except (ValueError, IndexError) as e:
            raise _fail(number, f"malformed {directive!r}: {e}") from e

    if n_states is None:
        msg = "MDP fixture has no 'states' line"
        raise MdpError(msg)
    stray = sorted(s for s in actions if not 0 <= s < n_states)
    if stray:
        msg = f"Actions declared for unknown states {stray}"
        raise MdpError(msg)
    return TabularMDP(
        n_states=n_states,
        actions=tuple(tuple(actions.get(s, ())) for s in range(n_states)),
        terminal=frozenset(terminal),
        discount=discount,
        horizon=horizon,
    )


def format_mdp(mdp: TabularMDP) -> str:
    """Render an MDP in fixture format; ``parse_mdp`` reads it back exactly."""
    lines = [f"states {mdp.n_states}", f"discount {mdp.discount!r}"]
    if mdp.horizon is not None:
        lines.append(f"horizon {mdp.horizon}")
    if mdp.terminal:
        lines.append("terminal " + " ".join(str(s) for s in sorted(mdp.terminal)))
    for s, state_actions in enumerate(mdp.actions):
        for action in state_actions:
            pairs = " ".join(f"{t}:{p!r}" for t, p in action.transitions)
            lines.append(f"action {s} {action.name} {action.utility!r} {pairs}")
    return "\n".join(lines) + "\n"


def load_mdp(path: str | Path) -> TabularMDP:
    """Read an MDP fixture file.

    Raises:
        MdpError: If the file cannot be read or parsed.
    """
    path = Path(path)
    try:
        text = path.read_text(encoding="utf-8")
    except OSError as e:
        msg = f"Could not read MDP fixture {path}: {e}"
        raise MdpError(msg) from e
    mdp = parse_mdp(text)
    logger.debug("Loaded %d-state MDP from %s", mdp.n_states, path)
    return mdp


def save_mdp(path: str | Path, mdp: TabularMDP) -> None:
    """Atomically write an MDP fixture file."""
    write_to_file(path, format_mdp(mdp))
