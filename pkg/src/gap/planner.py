"""Maximum-probability sequence inference and the action policy.

Planning runs Dijkstra's algorithm over one of the two maximal-likelihood
projections of the hypergraph, ordering the frontier by descending
cumulative product of step probabilities.  Ties break toward fewer steps
and then lower state id, so equal-probability regions (fully learned
deterministic worlds in particular) resolve to fewest-step plans and
identical queries always return identical plans.

Cumulative products are tracked directly in double precision; a path
whose product underflows to zero is treated as unreachable.  This keeps
reported joint probabilities bit-identical to a straight product over
the returned edges.

All functions here are pure with respect to the model snapshot and are
safe to call concurrently.
"""

from __future__ import annotations

import heapq
import math
import random
from dataclasses import dataclass, field
from typing import Callable

from .hypergraph import IncidenceHypergraph

APRIORI = "apriori"
APOSTERIORI = "aposteriori"

RANDOM = "random"
LEAST_CHOSEN = "least-chosen"


@dataclass
class Sequence:
    """An ordered plan: n states, n-1 actions, and the joint probability
    of the whole chain of transitions (1.0 for the empty plan)."""

    states: list[int]
    actions: list[int]
    joint_probability: float

    def __len__(self) -> int:
        return len(self.actions)

    def to_json(self, model: IncidenceHypergraph) -> dict:
        return {
            "states": [model.registry.string_of(s) for s in self.states],
            "actions": list(self.actions),
            "probability": self.joint_probability,
        }


class GoalSpec:
    """A goal: one concrete state id, an explicit id set, or a predicate
    over observation strings that classifies every registered state."""

    def __init__(
        self,
        state: int | None = None,
        predicate: Callable[[str], bool] | None = None,
        states: frozenset[int] | None = None,
    ) -> None:
        if sum(x is not None for x in (state, predicate, states)) != 1:
            raise ValueError("provide exactly one of state, states or predicate")
        self.state = state
        self.states = states
        self.predicate = predicate
        self._cache: dict[int, tuple[int, set[int]]] = {}

    @classmethod
    def for_state(cls, state: int) -> "GoalSpec":
        return cls(state=state)

    @classmethod
    def for_states(cls, states) -> "GoalSpec":
        return cls(states=frozenset(states))

    @classmethod
    def for_predicate(cls, predicate: Callable[[str], bool]) -> "GoalSpec":
        return cls(predicate=predicate)

    def ids(self, model: IncidenceHypergraph) -> set[int]:
        """Goal-satisfying state ids among those currently registered.

        Predicate goals are evaluated incrementally as the registry grows,
        so per-step calls cost O(new states) rather than O(|S|).
        """
        if self.state is not None:
            return {self.state} if self.state < model.num_states else set()
        if self.states is not None:
            n = model.num_states
            return {s for s in self.states if s < n}
        key = id(model)
        seen, found = self._cache.get(key, (0, set()))
        n = model.num_states
        if n > seen:
            for sid in range(seen, n):
                if self.predicate(model.registry.string_of(sid)):
                    found.add(sid)
            self._cache[key] = (n, found)
        return found

    def is_goal(self, state: int, model: IncidenceHypergraph) -> bool:
        if self.state is not None:
            return state == self.state
        if self.states is not None:
            return state in self.states
        return state in self.ids(model)


@dataclass
class PolicyConfig:
    """Knobs for the action policy.

    ``model`` selects which probability projection plans are drawn from.
    ``exploration`` governs what happens when no plan exists: uniform
    random actions, or the least-chosen action for the current state.
    ``stochastic_choice`` replaces the argmax first action of a plan with
    a sample weighted by each action's relative likelihood of producing
    the planned transition.  Runs with equal seeds are bit-reproducible.
    """

    model: str = APOSTERIORI
    exploration: str = RANDOM
    stochastic_choice: bool = False
    rng_seed: int = 0
    rng: random.Random = field(init=False, repr=False)

    def __post_init__(self) -> None:
        if self.model not in (APRIORI, APOSTERIORI):
            raise ValueError("unknown probability model: %r" % self.model)
        if self.exploration not in (RANDOM, LEAST_CHOSEN):
            raise ValueError("unknown exploration policy: %r" % self.exploration)
        self.rng = random.Random(self.rng_seed)


def _edges(model: IncidenceHypergraph, source: int, probability_model: str):
    """(next_state, action, probability) triples leaving ``source``.

    Both projections weight an edge by the chosen element's outcome
    share; they differ in which element is chosen per slice (the most
    frequent action for a transition, or the most frequent result of an
    action).
    """
    intercepted = model.probability_interceptor is not None
    if model.window is not None:
        # Windowed models plan on the moving-average shares, so stale
        # observations from earlier worlds wash out of the projection.
        if probability_model == APOSTERIORI:
            yield from model.out_transitions_windowed(source)
        else:
            yield from model.out_actions_windowed(source)
        return
    if probability_model == APOSTERIORI:
        for result, action, p in model.out_transitions(source):
            if intercepted:
                p = model.apriori_prob(source, action, result)
            yield result, action, p
    else:
        for action, result, p in model.out_actions(source):
            if intercepted:
                p = model.apriori_prob(source, action, result)
            yield result, action, p


def infer_sequence(
    model: IncidenceHypergraph,
    source: int,
    goal: GoalSpec,
    cfg: PolicyConfig | None = None,
    stats: dict | None = None,
) -> Sequence | None:
    """Extract the maximum-joint-probability path from ``source`` to the goal.

    Returns None when no goal-satisfying state is reachable through
    nonzero-probability edges, signalling the caller to explore.  When the
    source already satisfies the goal the empty plan (probability 1.0) is
    returned.  Settling the first goal-satisfying state is optimal because
    cumulative products are non-increasing along any extension.
    """
    cfg = cfg or PolicyConfig()
    goal_ids = goal.ids(model)
    if stats is not None:
        stats["expansions"] = 0
    if not goal_ids:
        return None
    if source in goal_ids:
        return Sequence([source], [], 1.0)
    if source >= model.num_states:
        raise ValueError("source state is not registered")

    best: dict[int, float] = {source: 1.0}
    parent: dict[int, tuple[int, int, float]] = {}
    settled: set[int] = set()
    heap: list[tuple[float, int, int]] = [(-1.0, 0, source)]
    pm = cfg.model
    push = heapq.heappush
    pop = heapq.heappop
    get_best = best.get
    # hot path: iterate the chains directly instead of going through the
    # _edges generator; this loop dominates every planned step
    fast = model.window is None and model.probability_interceptor is None
    action_chains = model._action_chains if fast else None
    result_chains = model._result_chains if fast else None
    sa_totals = model._total_sa if fast else None
    while heap:
        negp, steps, u = pop(heap)
        if u in settled:
            continue
        settled.add(u)
        if stats is not None:
            stats["expansions"] += 1
        if u in goal_ids:
            return _reconstruct(model, source, u, parent)
        pu = -negp
        if fast:
            totals_u = sa_totals[u]
            if pm == APOSTERIORI:
                for v, chain in action_chains[u].items():
                    if v in settled:
                        continue
                    order = chain.order
                    if not order:
                        continue
                    a = order[0]
                    p = chain.counts[a] / totals_u[a]
                    cand = pu * p
                    if cand > 0.0 and cand > get_best(v, 0.0):
                        best[v] = cand
                        parent[v] = (u, a, p)
                        push(heap, (-cand, steps + 1, v))
            else:
                for a, chain in result_chains[u].items():
                    order = chain.order
                    if not order:
                        continue
                    v = order[0]
                    if v in settled:
                        continue
                    p = chain.counts[v] / totals_u[a]
                    cand = pu * p
                    if cand > 0.0 and cand > get_best(v, 0.0):
                        best[v] = cand
                        parent[v] = (u, a, p)
                        push(heap, (-cand, steps + 1, v))
            continue
        for v, a, p in _edges(model, u, pm):
            if v in settled or p <= 0.0:
                continue
            cand = pu * p
            if cand <= 0.0:
                continue
            if cand > get_best(v, 0.0):
                best[v] = cand
                parent[v] = (u, a, p)
                push(heap, (-cand, steps + 1, v))
    return None


def _reconstruct(
    model: IncidenceHypergraph,
    source: int,
    goal: int,
    parent: dict[int, tuple[int, int, float]],
) -> Sequence:
    states = [goal]
    actions: list[int] = []
    probs: list[float] = []
    node = goal
    while node != source:
        prev, action, p = parent[node]
        states.append(prev)
        actions.append(action)
        probs.append(p)
        node = prev
    states.reverse()
    actions.reverse()
    probs.reverse()
    joint = 1.0
    for p in probs:
        joint *= p
    return Sequence(states, actions, joint)


def choose_action(
    model: IncidenceHypergraph,
    current: int,
    goal: GoalSpec,
    cfg: PolicyConfig,
) -> int:
    """First action of the inferred plan, or an exploration action.

    Exploration triggers when no plan exists (including the case where no
    goal-satisfying state has been registered yet) and when the current
    state already satisfies the goal.  With ``stochastic_choice`` set,
    actions toward the planned next state are sampled in proportion to
    their relative likelihood of producing that transition instead of
    taking the argmax.
    """
    plan = None
    if goal.ids(model):
        plan = infer_sequence(model, current, goal, cfg)
    if plan is not None and plan.actions:
        if cfg.stochastic_choice:
            return _sample_transition_action(model, current, plan.states[1], cfg.rng)
        return plan.actions[0]
    return explore_action(model, current, cfg)


def _sample_transition_action(
    model: IncidenceHypergraph, source: int, target: int, rng: random.Random
) -> int:
    """Sample an action with weight proportional to its outcome share of
    producing ``source -> target`` relative to the other actions."""
    weights = [
        model.apriori_prob(source, a, target) for a in range(model.num_actions)
    ]
    total = sum(weights)
    if total <= 0.0:
        return rng.randrange(model.num_actions)
    r = rng.random() * total
    acc = 0.0
    for a, w in enumerate(weights):
        acc += w
        if r < acc:
            return a
    return model.num_actions - 1


def explore_action(model: IncidenceHypergraph, current: int, cfg: PolicyConfig) -> int:
    """Exploration action per the configured policy: uniform random, or a
    uniform draw among the actions least chosen so far in this state."""
    if cfg.exploration == LEAST_CHOSEN:
        counts = model._total_sa[current]
        m = min(counts)
        candidates = [a for a, c in enumerate(counts) if c == m]
        return cfg.rng.choice(candidates)
    return cfg.rng.randrange(model.num_actions)


def transition_band_estimate(source: int, goal: int, num_states: int, v1: float) -> float:
    """Joint-probability estimate between two states from the diagonal-band
    structure of discovery-ordered models.

    States discovered close in time tend to be few actions apart, so
    learned transition mass concentrates near the grid diagonal with a
    spread that narrows toward late discovery.  The estimate is a scaled
    Gaussian in the (scaled) index gap, parameterised by the near-origin
    variance ``v1``.
    """
    n = num_states
    denom = 2.0 * n - (goal + source)
    z = n * (goal - source) / denom
    return (1.0 / (v1 * math.sqrt(2.0 * math.pi))) * (2.0 * n / denom) * math.exp(
        -(z * z) / v1
    )


def astar_infer(
    model: IncidenceHypergraph,
    source: int,
    goal: int,
    variance_v1: float | None = None,
    cfg: PolicyConfig | None = None,
    stats: dict | None = None,
) -> Sequence | None:
    """Best-first variant of ``infer_sequence`` for single-state goals.

    The frontier is ordered by the product of the path probability so far
    and a band-structure estimate of the remaining probability to the
    goal.  With ``variance_v1=None`` the estimate is identically 1 and
    the search degenerates to ``infer_sequence`` exactly.  The estimate is
    not guaranteed admissible; returned paths match the Dijkstra optimum
    whenever it is, which callers should validate empirically.
    """
    cfg = cfg or PolicyConfig()
    if variance_v1 is not None and variance_v1 <= 0.0:
        raise ValueError("variance_v1 must be positive")
    if stats is not None:
        stats["expansions"] = 0
    if goal >= model.num_states or source >= model.num_states:
        raise ValueError("source and goal must be registered")
    if source == goal:
        return Sequence([source], [], 1.0)

    n = model.num_states
    if variance_v1 is None:
        h = lambda s: 1.0
    else:
        h = lambda s: transition_band_estimate(s, goal, n, variance_v1)

    best: dict[int, float] = {source: 1.0}
    parent: dict[int, tuple[int, int, float]] = {}
    settled: set[int] = set()
    heap: list[tuple[float, int, int]] = [(-(1.0 * h(source)), 0, source)]
    pm = cfg.model
    while heap:
        _, steps, u = heapq.heappop(heap)
        if u in settled:
            continue
        settled.add(u)
        if stats is not None:
            stats["expansions"] += 1
        if u == goal:
            return _reconstruct(model, source, u, parent)
        pu = best[u]
        for v, a, p in _edges(model, u, pm):
            if v in settled or p <= 0.0:
                continue
            cand = pu * p
            if cand <= 0.0:
                continue
            if cand > best.get(v, 0.0):
                best[v] = cand
                parent[v] = (u, a, p)
                heapq.heappush(heap, (-(cand * h(v)), steps + 1, v))
    return None
