"""Pickup-and-deliver inside randomly generated ill-conditioned mazes.

Each reset carves a fresh maze by randomized depth-first search and then
punches out rectangular rooms, producing the open interior regions that
defeat wall-following shortcuts.  The observation is fully relative: the
passability of the eight neighbouring cells, a vector toward the current
objective (the pickup cell, then the dropoff cell; per-axis signs by
default, raw displacements with ``vector_mode="raw"``), the carrying
flag, how many deliveries remain, and the most recent action.  The coarse
vector keeps the observation space small enough that learning pools
across freshly generated mazes; the last-action component then carries
the heading information the coarse vector drops.

State constructions are composable rewrites of this string:

* AI keeps all eight neighbour bits (the default full observation);
* AII keeps only the four movement-relevant bits;
* wA keeps the most recent action, w/oA drops it.
"""

from __future__ import annotations

import random

from .base import Environment

MOVES = ((0, -1), (0, 1), (-1, 0), (1, 0))  # N, S, W, E
PICKUP, DROPOFF = 4, 5
# ring order: NW, N, NE, W, E, SW, S, SE
NEIGHBOURS8 = ((-1, -1), (0, -1), (1, -1), (-1, 0), (1, 0), (-1, 1), (0, 1), (1, 1))


def _carve_maze(width: int, height: int, rng: random.Random) -> set[tuple[int, int]]:
    """Depth-first passage carving on an odd lattice; returns open cells."""
    open_cells: set[tuple[int, int]] = set()
    start = (
        rng.randrange(width // 2) * 2 + 1,
        rng.randrange(height // 2) * 2 + 1,
    )
    stack = [start]
    open_cells.add(start)
    while stack:
        x, y = stack[-1]
        candidates = []
        for dx, dy in MOVES:
            nxt = (x + 2 * dx, y + 2 * dy)
            if 1 <= nxt[0] < width - 1 and 1 <= nxt[1] < height - 1:
                if nxt not in open_cells:
                    candidates.append((dx, dy))
        if not candidates:
            stack.pop()
            continue
        dx, dy = rng.choice(candidates)
        open_cells.add((x + dx, y + dy))
        open_cells.add((x + 2 * dx, y + 2 * dy))
        stack.append((x + 2 * dx, y + 2 * dy))
    return open_cells


class MazeTaxi(Environment):
    def __init__(
        self,
        width: int = 13,
        height: int = 13,
        rooms: int = 3,
        room_size: int = 3,
        targets: int = 1,
        vector_mode: str = "sign",
    ):
        if width % 2 == 0 or height % 2 == 0:
            raise ValueError("maze dimensions must be odd")
        if vector_mode not in ("sign", "raw"):
            raise ValueError("vector_mode must be 'sign' or 'raw'")
        self.width = width
        self.height = height
        self.rooms = rooms
        self.room_size = room_size
        self.targets = targets
        self.vector_mode = vector_mode
        self.open_cells: set[tuple[int, int]] = set()
        self.pickups: list[tuple[int, int]] = []
        self.dropoffs: list[tuple[int, int]] = []
        self.pos = (1, 1)
        self.carrying: int | None = None
        self.waiting: set[int] = set()
        self.delivered: set[int] = set()
        self.last_action = -1

    def reset(self, seed: int | None = None) -> str:
        rng = random.Random(seed)
        cells = _carve_maze(self.width, self.height, rng)
        for _ in range(self.rooms):
            # room punch-outs create the open interior regions
            rx = rng.randrange(1, max(2, self.width - self.room_size - 1))
            ry = rng.randrange(1, max(2, self.height - self.room_size - 1))
            for x in range(rx, rx + self.room_size):
                for y in range(ry, ry + self.room_size):
                    if 1 <= x < self.width - 1 and 1 <= y < self.height - 1:
                        cells.add((x, y))
        self.open_cells = cells
        special = rng.sample(sorted(cells), 2 * self.targets + 1)
        self.pos = special[0]
        self.pickups = special[1 : 1 + self.targets]
        self.dropoffs = special[1 + self.targets :]
        self.carrying = None
        self.waiting = set(range(self.targets))
        self.delivered = set()
        self.last_action = -1
        return self._observe()

    def action_count(self) -> int:
        return 6

    def step(self, action: int) -> str:
        if 0 <= action < 4:
            dx, dy = MOVES[action]
            nxt = (self.pos[0] + dx, self.pos[1] + dy)
            if nxt in self.open_cells:
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
        self.last_action = action
        return self._observe()

    def _objective(self) -> tuple[int, int] | None:
        if self.carrying is not None:
            return self.dropoffs[self.carrying]
        for p in sorted(self.waiting):
            return self.pickups[p]
        return None

    def _observe(self) -> str:
        x, y = self.pos
        bits = "".join(
            "1" if (x + dx, y + dy) in self.open_cells else "0"
            for dx, dy in NEIGHBOURS8
        )
        obj = self._objective()
        if obj is None:
            vx = vy = 0
        elif self.vector_mode == "raw":
            vx = obj[0] - x
            vy = obj[1] - y
        else:
            vx = (obj[0] > x) - (obj[0] < x)
            vy = (obj[1] > y) - (obj[1] < y)
        left = self.targets - len(self.delivered)
        return "n=%s;v=(%d,%d);c=%d;left=%d;a=%d" % (
            bits,
            vx,
            vy,
            int(self.carrying is not None),
            left,
            self.last_action,
        )

    def at_goal(self) -> bool:
        return len(self.delivered) == self.targets

    def goal_predicate(self):
        # wrappers may strip trailing fields, so match either position
        return lambda obs: ";left=0;" in obs or obs.endswith(";left=0")

    def export_layout(self) -> str:
        rows = []
        for y in range(self.height):
            row = []
            for x in range(self.width):
                c = (x, y)
                if c not in self.open_cells:
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


def complex_maze_taxi(
    width: int = 13,
    height: int = 13,
    rooms: int = 3,
    room_size: int = 3,
    targets: int = 1,
    vector_mode: str = "sign",
) -> MazeTaxi:
    return MazeTaxi(width, height, rooms, room_size, targets, vector_mode)
