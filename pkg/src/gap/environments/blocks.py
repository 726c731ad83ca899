"""Table-and-blocks stacking world with an order-anywhere goal.

Blocks 1..n start in a random arrangement over a fixed number of table
positions.  An action moves the top block of one position onto another
(any block stacks on any block); moving from an empty position is a
no-op self-loop.  The goal is any position holding every block ordered
from highest index at the bottom to lowest on top, which makes the goal
a predicate over observations rather than a single state.

Interleaved-subgoal starts (a higher-indexed block resting somewhere
above a lower-indexed one, the arrangement behind the classic planner
deadlock) occur naturally among random resets; ``goal_interference``
reports whether a configuration contains one.
"""

from __future__ import annotations

import random

from .base import Environment


class Blocksworld(Environment):
    def __init__(self, n_blocks: int, positions: int = 3):
        if n_blocks < 1 or positions < 2:
            raise ValueError("need at least one block and two positions")
        self.n_blocks = n_blocks
        self.positions = positions
        self.actions = [
            (i, j) for i in range(positions) for j in range(positions) if i != j
        ]
        self._goal_stack = list(range(n_blocks, 0, -1))  # bottom-first
        self.stacks: list[list[int]] = []
        self.reset(0)

    def reset(self, seed: int | None = None) -> str:
        rng = random.Random(seed)
        order = list(range(1, self.n_blocks + 1))
        rng.shuffle(order)
        self.stacks = [[] for _ in range(self.positions)]
        for b in order:
            self.stacks[rng.randrange(self.positions)].append(b)
        return self._observe()

    def action_count(self) -> int:
        return len(self.actions)

    def step(self, action: int) -> str:
        src, dst = self.actions[action]
        if self.stacks[src]:
            self.stacks[dst].append(self.stacks[src].pop())
        return self._observe()

    _obs_cache: dict = {}  # rendering is a pure function of the arrangement

    def _observe(self) -> str:
        # configurations recur constantly during random walks; memoise the
        # rendered string per arrangement
        key = tuple(tuple(s) for s in self.stacks)
        obs = self._obs_cache.get(key)
        if obs is None:
            obs = "[%s]" % ",".join(
                "[%s]" % ",".join(str(b) for b in s) for s in self.stacks
            )
            self._obs_cache[key] = obs
        return obs

    def at_goal(self) -> bool:
        return any(s == self._goal_stack for s in self.stacks)

    def goal_predicate(self):
        target = "[%s]" % ",".join(str(b) for b in self._goal_stack)
        return lambda obs: target in obs

    def export_layout(self) -> dict:
        return {
            "n_blocks": self.n_blocks,
            "positions": self.positions,
            "stacks": [list(s) for s in self.stacks],
        }

    def goal_interference(self) -> bool:
        """True when some higher-indexed block sits above a lower-indexed
        one, so a subgoal must be undone before the goal stack can form."""
        for stack in self.stacks:
            for lower_pos in range(len(stack)):
                for upper_pos in range(lower_pos + 1, len(stack)):
                    if stack[upper_pos] > stack[lower_pos]:
                        return True
        return False


def blocksworld(n_blocks: int, positions: int = 3) -> Blocksworld:
    return Blocksworld(n_blocks, positions)
