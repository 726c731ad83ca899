"""Procedural fetch-and-deliver world over a linked location line.

The agent moves along a row of locations, must fetch an item from the
far end, open a door that blocks the passage to the goal location, and
finish at the goal while holding the item.  The door's open/closed
status is deliberately excluded from the observation, so the same
observed state can react differently to a move, which the model absorbs
as outcome uncertainty.

The concrete map ships as a data file; its canonical start is exactly 17
steps from the goal (walk to the item, fetch, walk back to the door,
open, pass through) and episodes start at random locations in the right
half of the line.
"""

from __future__ import annotations

import json
import random
from importlib import resources

from .base import Environment

LEFT, RIGHT, FETCH, OPEN = 0, 1, 2, 3


def _load_map() -> dict:
    with resources.files("gap").joinpath("data/strips_map.json").open() as fh:
        return json.load(fh)


class StripsWorld(Environment):
    def __init__(self) -> None:
        self.layout = _load_map()
        self.cells = self.layout["cells"]
        self.door_lo, self.door_hi = sorted(self.layout["door_between"])
        self.buttons = set(self.layout["door_buttons"])
        self.item_cell = self.layout["item_cell"]
        self.goal_cell = self.layout["goal_cell"]
        self.pos = self.layout["canonical_start"]
        self.has_item = False
        self.door_open = False

    def reset(self, seed: int | None = None) -> str:
        if seed is None:
            self.pos = self.layout["canonical_start"]
        else:
            self.pos = random.Random(seed).choice(self.layout["start_cells"])
        self.has_item = False
        self.door_open = False
        return self._observe()

    def action_count(self) -> int:
        return 4

    def _blocked(self, a: int, b: int) -> bool:
        lo, hi = min(a, b), max(a, b)
        return (lo, hi) == (self.door_lo, self.door_hi) and not self.door_open

    def step(self, action: int) -> str:
        if action == LEFT:
            nxt = self.pos - 1
            if nxt >= 0 and not self._blocked(self.pos, nxt):
                self.pos = nxt
        elif action == RIGHT:
            nxt = self.pos + 1
            if nxt < self.cells and not self._blocked(self.pos, nxt):
                self.pos = nxt
        elif action == FETCH:
            if self.pos == self.item_cell:
                self.has_item = True
        elif action == OPEN:
            if self.pos in self.buttons:
                self.door_open = True
        else:
            raise ValueError("unknown action %d" % action)
        return self._observe()

    def _observe(self) -> str:
        return "loc=%d;item=%d" % (self.pos, int(self.has_item))

    def at_goal(self) -> bool:
        return self.pos == self.goal_cell and self.has_item

    def optimal_steps(self) -> int:
        return self.layout["optimal_from_canonical"]

    def goal_predicate(self):
        target = "loc=%d;item=1" % self.goal_cell
        return lambda obs: obs == target

    def export_layout(self) -> dict:
        return dict(self.layout)


def strips_world() -> StripsWorld:
    return StripsWorld()
