"""Pickup-and-deliver gridworld with sparse random obstacles.

A square grid gets a fresh random layout on every reset: wall cells
covering roughly the requested fraction of the area, plus distinct
pickup and dropoff cells for each passenger and a start cell, all
mutually reachable.  The observation reports the agent location, whether
a passenger is carried, whether the cell is a waiting passenger's pickup
('P'), the carried passenger's dropoff ('D') or neither ('N'), and how
many passengers are still undelivered.
"""

from __future__ import annotations

import random
from collections import deque

from .base import Environment

MOVES = ((0, -1), (0, 1), (-1, 0), (1, 0))  # N, S, W, E as (dx, dy)
PICKUP, DROPOFF = 4, 5


class SimpleTaxi(Environment):
    def __init__(self, size: int = 15, obstacle_fraction: float = 0.10, targets: int = 3):
        if size < 3 or targets < 1:
            raise ValueError("world too small")
        self.size = size
        self.obstacle_fraction = obstacle_fraction
        self.targets = targets
        self.walls: set[tuple[int, int]] = set()
        self.pickups: list[tuple[int, int]] = []
        self.dropoffs: list[tuple[int, int]] = []
        self.pos = (0, 0)
        self.carrying: int | None = None
        self.waiting: set[int] = set()
        self.delivered: set[int] = set()

    # ------------------------------------------------------------------

    def reset(self, seed: int | None = None) -> str:
        rng = random.Random(seed)
        while True:
            self._generate(rng)
            if self._key_cells_connected():
                break
        self.carrying = None
        self.waiting = set(range(self.targets))
        self.delivered = set()
        return self._observe()

    def _generate(self, rng: random.Random) -> None:
        n = self.size
        cells = [(x, y) for x in range(n) for y in range(n)]
        n_walls = int(round(self.obstacle_fraction * n * n))
        self.walls = set(rng.sample(cells, n_walls))
        open_cells = [c for c in cells if c not in self.walls]
        special = rng.sample(open_cells, 2 * self.targets + 1)
        self.pos = special[0]
        self.pickups = special[1 : 1 + self.targets]
        self.dropoffs = special[1 + self.targets :]

    def _key_cells_connected(self) -> bool:
        targets = set(self.pickups) | set(self.dropoffs)
        seen = {self.pos}
        queue = deque([self.pos])
        while queue:
            x, y = queue.popleft()
            for dx, dy in MOVES:
                nxt = (x + dx, y + dy)
                if (
                    0 <= nxt[0] < self.size
                    and 0 <= nxt[1] < self.size
                    and nxt not in self.walls
                    and nxt not in seen
                ):
                    seen.add(nxt)
                    queue.append(nxt)
        return targets <= seen

    # ------------------------------------------------------------------

    def action_count(self) -> int:
        return 6

    def step(self, action: int) -> str:
        if 0 <= action < 4:
            dx, dy = MOVES[action]
            nxt = (self.pos[0] + dx, self.pos[1] + dy)
            if (
                0 <= nxt[0] < self.size
                and 0 <= nxt[1] < self.size
                and nxt not in self.walls
            ):
                self.pos = nxt
        elif action == PICKUP:
            if self.carrying is None:
                for p in sorted(self.waiting):
                    if self.pickups[p] == self.pos:
                        self.carrying = p
                        self.waiting.discard(p)
                        break
        elif action == DROPOFF:
            if self.carrying is not None and self.dropoffs[self.carrying] == self.pos:
                self.delivered.add(self.carrying)
                self.carrying = None
        else:
            raise ValueError("unknown action %d" % action)
        return self._observe()

    def _observe(self) -> str:
        if self.carrying is not None:
            at = "D" if self.pos == self.dropoffs[self.carrying] else "N"
        else:
            at = "P" if any(self.pickups[p] == self.pos for p in self.waiting) else "N"
        left = self.targets - len(self.delivered)
        return "loc=(%d,%d);carry=%d;at=%s;left=%d" % (
            self.pos[0],
            self.pos[1],
            int(self.carrying is not None),
            at,
            left,
        )

    def at_goal(self) -> bool:
        return len(self.delivered) == self.targets

    def goal_predicate(self):
        return lambda obs: obs.endswith(";left=0")

    def export_layout(self) -> str:
        rows = []
        for y in range(self.size):
            row = []
            for x in range(self.size):
                c = (x, y)
                if c in self.walls:
                    row.append("#")
                elif c == self.pos:
                    row.append("o")
                elif c in self.pickups:
                    row.append("p")
                elif c in self.dropoffs:
                    row.append("d")
                else:
                    row.append(".")
            rows.append("".join(row))
        return "\n".join(rows)


def simple_taxi(size: int = 15, obstacle_fraction: float = 0.10, targets: int = 3) -> SimpleTaxi:
    return SimpleTaxi(size, obstacle_fraction, targets)
