"""Named observation-string abstractions, composable where meaningful.

A wrapper rewrites only the observation string; dynamics, actions and
goal detection stay with the inner environment.  Because rewrites are
lossy, several true states may alias onto one wrapped observation; that
conflation is the point of the abstraction and is what the quality
metrics in :mod:`gap.abstraction` measure.

Registered names:

* pickup gridworld: ``loc/2``, ``loc[0]/3``, ``loc/1.5`` (coordinate
  compressions, floor division);
* maze worlds: ``AI`` (8-neighbourhood, the identity), ``AII``
  (4-neighbourhood), ``wA`` (keep last action, the identity), ``w/oA``
  (drop it); the neighbourhood choice and the action flag commute;
* tower puzzle: ``AI``..``AIV`` (numeric compressions of the full state).
"""

from __future__ import annotations

import math
from typing import Callable

from .base import Environment
from .binary_add import BinaryAddition
from .blocks import Blocksworld
from .hanoi import TowerOfHanoi, parse_state
from .maze_taxi import MazeTaxi
from .strips import StripsWorld
from .taxi import SimpleTaxi


class ObservationWrapper(Environment):
    def __init__(
        self,
        inner: Environment,
        name: str,
        transform: Callable[[str], str],
        goal_observation: str | None = None,
    ):
        self.inner = inner
        self.name = name
        self._transform = transform
        self._goal_obs = goal_observation

    def reset(self, seed: int | None = None) -> str:
        return self._transform(self.inner.reset(seed))

    def action_count(self) -> int:
        return self.inner.action_count()

    def step(self, action: int) -> str:
        return self._transform(self.inner.step(action))

    def at_goal(self) -> bool:
        return self.inner.at_goal()

    def optimal_steps(self) -> int | None:
        return self.inner.optimal_steps()

    def goal_predicate(self):
        if self._goal_obs is not None:
            target = self._goal_obs
            return lambda obs: obs == target
        return self.inner.goal_predicate()

    def goal_observation(self) -> str:
        if self._goal_obs is not None:
            return self._goal_obs
        return self._transform(self.inner.goal_observation())  # type: ignore[attr-defined]

    def export_layout(self):
        return self.inner.export_layout()


# ----------------------------------------------------------------------
# pickup gridworld: coordinate compressions


def _rewrite_loc(obs: str, fx: Callable[[int], int], fy: Callable[[int], int]) -> str:
    head, rest = obs.split(";", 1)
    x, y = head[5:-1].split(",")
    return "loc=(%d,%d);%s" % (fx(int(x)), fy(int(y)), rest)


_TAXI_REWRITES: dict[str, Callable[[str], str]] = {
    "loc/2": lambda obs: _rewrite_loc(obs, lambda x: x // 2, lambda y: y // 2),
    "loc[0]/3": lambda obs: _rewrite_loc(obs, lambda x: x // 3, lambda y: y),
    "loc/1.5": lambda obs: _rewrite_loc(
        obs, lambda x: math.floor(x / 1.5), lambda y: math.floor(y / 1.5)
    ),
}


# ----------------------------------------------------------------------
# maze worlds: neighbourhood reduction and last-action visibility


def _maze_aii(obs: str) -> str:
    head, rest = obs.split(";", 1)
    bits = head[2:]
    if len(bits) == 8:  # ring order NW,N,NE,W,E,SW,S,SE -> keep N,W,E,S
        bits = bits[1] + bits[3] + bits[4] + bits[6]
    return "n=%s;%s" % (bits, rest)


def _maze_drop_action(obs: str) -> str:
    return obs.rsplit(";a=", 1)[0]


_MAZE_REWRITES: dict[str, Callable[[str], str]] = {
    "AI": lambda obs: obs,
    "wA": lambda obs: obs,
    "AII": _maze_aii,
    "w/oA": _maze_drop_action,
}


# ----------------------------------------------------------------------
# tower puzzle: numeric compressions of the full state


def _toh_ai(obs: str) -> str:
    return str(sum(math.prod(s) for s in parse_state(obs) if s))


def _toh_aii(obs: str) -> str:
    return "[%s]" % ",".join(str(sum(s)) for s in parse_state(obs))


def _toh_aiii(obs: str) -> str:
    return "[%s]" % ",".join(
        "(%d,%d)" % (len(s), s[0] if s else 0) for s in parse_state(obs)
    )


def _toh_aiv(obs: str) -> str:
    return "[%s]" % ",".join(str(len(s)) for s in parse_state(obs))


_TOH_REWRITES: dict[str, Callable[[str], str]] = {
    "AI": _toh_ai,
    "AII": _toh_aii,
    "AIII": _toh_aiii,
    "AIV": _toh_aiv,
}


def _root(env: Environment) -> Environment:
    while isinstance(env, ObservationWrapper):
        env = env.inner
    return env


def wrap(env: Environment, *names: str) -> Environment:
    """Apply named abstractions to an environment, outermost last."""
    for name in names:
        root = _root(env)
        if isinstance(root, SimpleTaxi):
            table = _TAXI_REWRITES
        elif isinstance(root, MazeTaxi):
            table = _MAZE_REWRITES
        elif isinstance(root, TowerOfHanoi):
            table = _TOH_REWRITES
        elif isinstance(root, (Blocksworld, BinaryAddition, StripsWorld)):
            table = {}
        else:
            raise ValueError("no abstractions registered for %r" % type(root).__name__)
        if name not in table:
            raise ValueError(
                "unknown abstraction %r for %s" % (name, type(root).__name__)
            )
        fx = table[name]
        goal_obs = None
        if isinstance(root, TowerOfHanoi):
            goal_obs = fx(env.goal_observation())  # type: ignore[attr-defined]
        env = ObservationWrapper(env, name, fx, goal_obs)
    return env
