"""Tower puzzle with legal-move semantics and composable state encodings.

Disks are indexed 1..d from smallest to largest; pegs are rendered
top-first, so "[[1,3],[2],[4,5]]" has disk 1 resting on disk 3.  Actions
are the ordered peg pairs in lexicographic order (p*(p-1) of them); a
move violating the size rule, or from an empty peg, leaves the state
unchanged and is observed as a self-loop.

Four numeric compressions of the full state ship as wrappers:

* AI:   sum over pegs of the product of disk indices ("25");
* AII:  per-peg sums of disk indices ("[4,2,9]");
* AIII: per-peg (disk count, top disk index) pairs ("[(2,1),(1,2),(2,4)]");
* AIV:  per-peg disk counts ("[2,1,2]").

Empty pegs contribute 0 to AI and AII and (0,0) to AIII.
"""

from __future__ import annotations

from .base import Environment


class TowerOfHanoi(Environment):
    def __init__(self, pegs: int = 3, disks: int = 3):
        if pegs < 3 or disks < 1:
            raise ValueError("need at least 3 pegs and 1 disk")
        self.pegs = pegs
        self.disks = disks
        self.actions = [
            (i, j) for i in range(pegs) for j in range(pegs) if i != j
        ]
        goal_stacks = [[] for _ in range(pegs - 1)] + [list(range(1, disks + 1))]
        self._goal_obs = state_string(goal_stacks)
        self.stacks: list[list[int]] = []
        self.reset()

    def reset(self, seed: int | None = None) -> str:
        # canonical start: every disk on the first peg
        self.stacks = [list(range(1, self.disks + 1))] + [
            [] for _ in range(self.pegs - 1)
        ]
        return self._observe()

    def action_count(self) -> int:
        return len(self.actions)

    def step(self, action: int) -> str:
        src, dst = self.actions[action]
        source = self.stacks[src]
        dest = self.stacks[dst]
        if source and (not dest or dest[0] > source[0]):
            dest.insert(0, source.pop(0))
        return self._observe()

    def _observe(self) -> str:
        return state_string(self.stacks)

    def at_goal(self) -> bool:
        return len(self.stacks[-1]) == self.disks

    def optimal_steps(self) -> int | None:
        if self.pegs == 3:
            return 2**self.disks - 1
        return None

    def goal_predicate(self):
        target = self._goal_obs
        return lambda obs: obs == target

    def goal_observation(self) -> str:
        return self._goal_obs

    def export_layout(self) -> dict:
        return {"pegs": self.pegs, "disks": self.disks, "stacks": [list(s) for s in self.stacks]}

    def legal_states(self) -> set[str]:
        """All reachable state strings (every disk placement is legal and
        reachable, so this enumerates peg assignments directly)."""
        states: set[str] = set()

        def assign(disk: int, stacks: list[list[int]]) -> None:
            if disk > self.disks:
                states.add(state_string(stacks))
                return
            for p in range(self.pegs):
                stacks[p].append(disk)
                assign(disk + 1, stacks)
                stacks[p].pop()

        # assign from smallest to largest so each stack lists top-first
        assign(1, [[] for _ in range(self.pegs)])
        return states


def state_string(stacks: list[list[int]]) -> str:
    return "[%s]" % ",".join("[%s]" % ",".join(str(d) for d in s) for s in stacks)


def parse_state(obs: str) -> list[list[int]]:
    inner = obs[1:-1]
    stacks: list[list[int]] = []
    depth = 0
    token = ""
    for ch in inner:
        if ch == "[":
            depth += 1
            token = ""
        elif ch == "]":
            depth -= 1
            stacks.append([int(x) for x in token.split(",") if x])
        elif depth == 1:
            token += ch
    return stacks


def tower_of_hanoi(pegs: int = 3, disks: int = 3) -> TowerOfHanoi:
    return TowerOfHanoi(pegs, disks)
