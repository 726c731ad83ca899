"""Shared oracles and builders used across the test suite.

Oracles here are deliberately independent of the code paths they check:
path enumeration is plain DFS over explicitly constructed edge lists,
matrix references use numpy matrix powers, and pseudoinverses come from
numpy's SVD routine rather than the package's normal-equation solve.
"""

from __future__ import annotations

import random

import numpy as np

from gap import APOSTERIORI, IncidenceHypergraph
from gap.markov import TransitionMatrix


def build_random_model(
    rng: random.Random,
    n_states: int,
    n_actions: int,
    records: int,
    density: float = 0.5,
) -> IncidenceHypergraph:
    """A model filled with random records over a random support pattern."""
    model = IncidenceHypergraph(n_actions)
    for i in range(n_states):
        model.register_state("s%d" % i)
    triples = [
        (i, a, j)
        for i in range(n_states)
        for j in range(n_states)
        for a in range(n_actions)
        if rng.random() < density
    ]
    if not triples:
        triples = [(0, 0, n_states - 1)]
    for _ in range(records):
        i, a, j = rng.choice(triples)
        model.record(i, a, j)
    return model


def projection_edges(model: IncidenceHypergraph, source: int, pm: str):
    """Edge list of the maximal-likelihood projection used for planning."""
    if pm == APOSTERIORI:
        return list(model.out_transitions(source))
    return [(res, act, p) for act, res, p in model.out_actions(source)]


def enumerate_best_path(
    model: IncidenceHypergraph, source: int, goal_ids: set[int], pm: str
) -> float:
    """Exhaustive maximum product over simple paths in the projection graph.

    Returns 0.0 when no goal-satisfying state is reachable; 1.0 when the
    source already satisfies the goal.
    """
    if source in goal_ids:
        return 1.0
    best = 0.0
    n = model.num_states
    visited = [False] * n
    visited[source] = True

    def dfs(u: int, product: float) -> None:
        nonlocal best
        for v, _a, p in projection_edges(model, u, pm):
            if visited[v] or p <= 0.0:
                continue
            cand = product * p
            if cand <= best and cand <= 0.0:
                continue
            if v in goal_ids:
                if cand > best:
                    best = cand
                continue
            visited[v] = True
            dfs(v, cand)
            visited[v] = False

    dfs(source, 1.0)
    return best


def enumerate_best_path_full_aposteriori(
    model: IncidenceHypergraph, source: int, goal_ids: set[int]
) -> float:
    """Exhaustive maximum product over simple paths in the full hypergraph,
    every action per transition weighted by its action share."""
    if source in goal_ids:
        return 1.0
    n = model.num_states
    adj: list[list[tuple[int, float]]] = [[] for _ in range(n)]
    for i in range(n):
        for j in range(n):
            t = model.transition_total(i, j)
            if not t:
                continue
            for a in range(model.num_actions):
                c = model.count(i, j, a)
                if c:
                    adj[i].append((j, c / t))
    best = 0.0
    visited = [False] * n
    visited[source] = True

    def dfs(u: int, product: float) -> None:
        nonlocal best
        for v, p in adj[u]:
            if visited[v]:
                continue
            cand = product * p
            if v in goal_ids:
                best = max(best, cand)
                continue
            visited[v] = True
            dfs(v, cand)
            visited[v] = False

    dfs(source, 1.0)
    return best


def random_goal_matrix(
    rng: np.random.Generator, n: int, density: float = 0.5, goal: int | None = None
) -> TransitionMatrix:
    """Random column-stochastic matrix with an absorbing goal column."""
    goal = n - 1 if goal is None else goal
    P = np.zeros((n, n))
    for i in range(n):
        if i == goal:
            P[goal, goal] = 1.0
            continue
        support = [j for j in range(n) if rng.random() < density]
        if not support:
            support = [int(rng.integers(n))]
        weights = rng.random(len(support)) + 1e-3
        weights /= weights.sum()
        for j, w in zip(support, weights):
            P[j, i] += w
    return TransitionMatrix(P, goal)


def reverse_reachable(P: np.ndarray, goal: int) -> set[int]:
    """States that can reach ``goal`` through nonzero entries (oracle BFS)."""
    n = P.shape[0]
    parents = [[] for _ in range(n)]
    for j in range(n):
        for i in range(n):
            if P[j, i] > 0 and i != j:
                parents[j].append(i)
    seen = {goal}
    stack = [goal]
    while stack:
        v = stack.pop()
        for u in parents[v]:
            if u not in seen:
                seen.add(u)
                stack.append(u)
    return seen
