"""Environment contract and the action-substitution error injector."""

from __future__ import annotations

import random
from typing import Callable


class Environment:
    """Behavior contract shared by all benchmark worlds.

    Observations are strings and are deterministic functions of internal
    state.  ``reset(seed)`` rebuilds the world (re-randomised where the
    domain calls for it) and returns the initial observation.  ``step``
    must not be called on a goal-satisfying state.
    """

    def reset(self, seed: int | None = None) -> str:
        raise NotImplementedError

    def action_count(self) -> int:
        raise NotImplementedError

    def step(self, action: int) -> str:
        raise NotImplementedError

    def at_goal(self) -> bool:
        raise NotImplementedError

    def optimal_steps(self) -> int | None:
        """Known shortest solution length, or None when unknown."""
        return None

    def goal_predicate(self) -> Callable[[str], bool]:
        """Classifier marking goal-satisfying observation strings."""
        raise NotImplementedError

    def export_layout(self):
        """World layout in an inspectable form (dict or text grid)."""
        raise NotImplementedError


class ErrorInjector:
    """Substitutes a hidden uniformly random action a fixed share of the time.

    With rate 0 the injector is the identity.  The substitution draws
    uniformly from all actions, so the planned action itself may come up;
    the caller records the intended action either way, keeping the
    substitution invisible to the model.
    """

    def __init__(self, rate: float, num_actions: int, seed: int | None = None) -> None:
        if not (0.0 <= rate <= 1.0):
            raise ValueError("rate must lie in [0, 1]")
        if num_actions < 1:
            raise ValueError("num_actions must be >= 1")
        self.rate = rate
        self.num_actions = num_actions
        self.rng = random.Random(seed)

    def apply(self, action: int) -> int:
        if self.rate > 0.0 and self.rng.random() < self.rate:
            return self.rng.randrange(self.num_actions)
        return action


def inject_error(inner_action: int, inj: ErrorInjector) -> int:
    """Pass ``inner_action`` through the injector's threshold process."""
    return inj.apply(inner_action)
