"""Binary addition as a relative-observation editing task.

Two random n-digit numbers are fixed per episode together with a random
initial guess at their (n+1)-digit sum.  The agent walks an index over
the result digits and toggles bits until every result digit matches the
true sum.  The observation deliberately omits the index itself: it shows
only the addend digits and result digit under the cursor, the scratch
carry bit, and the count of currently correct result digits, so distinct
positions with identical local digit patterns alias onto one state.
Index moves beyond either end clamp in place (observed self-loops).
"""

from __future__ import annotations

import random

from .base import Environment

TOGGLE_RESULT, TOGGLE_CARRY, INDEX_UP, INDEX_DOWN = 0, 1, 2, 3


class BinaryAddition(Environment):
    def __init__(self, n_digits: int):
        if n_digits < 1:
            raise ValueError("need at least one digit")
        self.n_digits = n_digits
        self.a: list[int] = []
        self.b: list[int] = []
        self.true_sum: list[int] = []
        self.result: list[int] = []
        self.carry = 0
        self.index = 0
        self.reset(0)

    def reset(self, seed: int | None = None) -> str:
        rng = random.Random(seed)
        n = self.n_digits
        self.a = [rng.randrange(2) for _ in range(n)]
        self.b = [rng.randrange(2) for _ in range(n)]
        total = sum(d << i for i, d in enumerate(self.a)) + sum(
            d << i for i, d in enumerate(self.b)
        )
        self.true_sum = [(total >> i) & 1 for i in range(n + 1)]
        self.result = [rng.randrange(2) for _ in range(n + 1)]
        self.carry = 0
        self.index = 0
        return self._observe()

    def action_count(self) -> int:
        return 4

    def step(self, action: int) -> str:
        if action == TOGGLE_RESULT:
            self.result[self.index] ^= 1
        elif action == TOGGLE_CARRY:
            self.carry ^= 1
        elif action == INDEX_UP:
            if self.index < self.n_digits:
                self.index += 1
        elif action == INDEX_DOWN:
            if self.index > 0:
                self.index -= 1
        else:
            raise ValueError("unknown action %d" % action)
        return self._observe()

    def _correct(self) -> int:
        return sum(r == t for r, t in zip(self.result, self.true_sum))

    def _observe(self) -> str:
        i = self.index
        a_i = self.a[i] if i < self.n_digits else 0
        b_i = self.b[i] if i < self.n_digits else 0
        return "a=%d;b=%d;r=%d;c=%d;ok=%d" % (
            a_i,
            b_i,
            self.result[i],
            self.carry,
            self._correct(),
        )

    def at_goal(self) -> bool:
        return self.result == self.true_sum

    def goal_predicate(self):
        suffix = ";ok=%d" % (self.n_digits + 1)
        return lambda obs: obs.endswith(suffix)

    def export_layout(self) -> dict:
        return {
            "a": list(self.a),
            "b": list(self.b),
            "true_sum": list(self.true_sum),
            "result": list(self.result),
        }


def binary_addition(n_digits: int) -> BinaryAddition:
    return BinaryAddition(n_digits)
