"""Markov-chain certificates for a learned model under a fixed goal.

The greedy policy induced by a model and goal is summarised as a
column-stochastic transition matrix whose goal column is absorbing.
Everything else here is read-only linear algebra over that matrix:
time-evolved state distributions, per-state goal-reach probabilities,
trap-net detection, the longest minimum path to goal, and threshold
step bounds.

Conventions.  Column i of the matrix is the outcome distribution of the
policy's chosen action in state i, so ``P @ dist`` advances a column
state distribution by one step.  Norm subscripts follow the induced-L1
convention: the norm of a matrix block is its maximum absolute column
sum.
"""

from __future__ import annotations

import heapq
import math
from dataclasses import dataclass, field
from functools import cached_property

import numpy as np

from .hypergraph import IncidenceHypergraph
from .planner import APOSTERIORI, _edges

_COLUMN_TOL = 1e-9


@dataclass
class TransitionMatrix:
    """Column-stochastic |S| x |S| matrix with one absorbing goal column.

    ``t_s`` is the block internal to non-goal states and ``t_g`` the row
    of one-step goal transition probabilities from non-goal states; both
    use ascending original state order with the goal removed.
    """

    matrix: np.ndarray
    goal_index: int

    def __post_init__(self) -> None:
        P = np.asarray(self.matrix, dtype=float)
        n = P.shape[0]
        if P.shape != (n, n):
            raise ValueError("matrix must be square")
        if not (0 <= self.goal_index < n):
            raise ValueError("goal_index out of range")
        if (P < -_COLUMN_TOL).any() or (P > 1 + _COLUMN_TOL).any():
            raise ValueError("entries must lie in [0, 1]")
        if np.abs(P.sum(axis=0) - 1.0).max() > _COLUMN_TOL:
            raise ValueError("columns must sum to 1")
        goal_col = np.zeros(n)
        goal_col[self.goal_index] = 1.0
        if np.abs(P[:, self.goal_index] - goal_col).max() > _COLUMN_TOL:
            raise ValueError("goal column must be absorbing")
        self.matrix = P

    @property
    def size(self) -> int:
        return self.matrix.shape[0]

    @cached_property
    def _nongoal(self) -> np.ndarray:
        return np.array(
            [i for i in range(self.size) if i != self.goal_index], dtype=int
        )

    @cached_property
    def t_s(self) -> np.ndarray:
        ng = self._nongoal
        return self.matrix[np.ix_(ng, ng)]

    @cached_property
    def t_g(self) -> np.ndarray:
        return self.matrix[self.goal_index, self._nongoal]


def unit_distribution(size: int, state: int) -> np.ndarray:
    d = np.zeros(size)
    d[state] = 1.0
    return d


# ----------------------------------------------------------------------
# matrix construction


def _policy_first_actions(
    model: IncidenceHypergraph, goal_ids: set[int], probability_model: str
) -> dict[int, int]:
    """First action of the maximum-probability path to the goal set, for
    every state from which the set is reachable.

    Computed as one reverse Dijkstra over the projection graph rooted in
    the goal set; path products are direction-independent so the tree
    matches per-state forward planning up to equal-probability ties.
    """
    n = model.num_states
    radj: list[list[tuple[int, int, float]]] = [[] for _ in range(n)]
    for u in range(n):
        for v, a, p in _edges(model, u, probability_model):
            if p > 0.0 and v < n:
                radj[v].append((u, a, p))
    best: dict[int, float] = {g: 1.0 for g in goal_ids}
    action_of: dict[int, int] = {}
    heap: list[tuple[float, int, int]] = [(-1.0, 0, g) for g in sorted(goal_ids)]
    heapq.heapify(heap)
    settled: set[int] = set()
    while heap:
        negp, steps, v = heapq.heappop(heap)
        if v in settled:
            continue
        settled.add(v)
        pv = -negp
        for u, a, p in radj[v]:
            if u in settled or u in goal_ids:
                continue
            cand = pv * p
            if cand > best.get(u, 0.0):
                best[u] = cand
                action_of[u] = a
                heapq.heappush(heap, (-cand, steps + 1, u))
    return action_of


def build_transition_matrix(
    model: IncidenceHypergraph, goal: int, probability_model: str = APOSTERIORI
) -> TransitionMatrix:
    """Summarise the policy for a single-state goal as a TransitionMatrix.

    Each non-goal column is the full observed outcome distribution of the
    policy's chosen action there, non-optimal outcomes included.  States
    with no observations, and states from which the goal is unreachable,
    get conservative absorbing self-loops (and hence surface as traps).
    """
    n = model.num_states
    if not (0 <= goal < n):
        raise ValueError("goal state is not registered")
    action_of = _policy_first_actions(model, {goal}, probability_model)
    P = np.zeros((n, n))
    P[goal, goal] = 1.0
    for i in range(n):
        if i == goal:
            continue
        a = action_of.get(i)
        if a is None:
            P[i, i] = 1.0
            continue
        total = float(model.action_total(i, a))
        for j, c in model.outcome_counts(i, a):
            P[j, i] = c / total
    return TransitionMatrix(P, goal)


def build_merged_transition_matrix(
    model: IncidenceHypergraph,
    goal_ids: set[int],
    probability_model: str = APOSTERIORI,
) -> tuple[TransitionMatrix, np.ndarray]:
    """Like ``build_transition_matrix`` for a goal set, with all
    goal-satisfying states merged into one absorbing super-column.

    Returns the matrix and an index map from original state ids to matrix
    indices (every goal state maps to the merged goal index, which is the
    last one).
    """
    n = model.num_states
    goal_set = {g for g in goal_ids if 0 <= g < n}
    if not goal_set:
        raise ValueError("goal set contains no registered states")
    nongoal = [i for i in range(n) if i not in goal_set]
    gidx = len(nongoal)
    mapping = np.full(n, gidx, dtype=int)
    mapping[nongoal] = np.arange(gidx)
    m = gidx + 1
    P = np.zeros((m, m))
    P[gidx, gidx] = 1.0
    action_of = _policy_first_actions(model, goal_set, probability_model)
    for i in nongoal:
        k = mapping[i]
        a = action_of.get(i)
        if a is None:
            P[k, k] = 1.0
            continue
        total = float(model.action_total(i, a))
        for j, c in model.outcome_counts(i, a):
            P[mapping[j], k] += c / total
    return TransitionMatrix(P, gidx), mapping


# ----------------------------------------------------------------------
# time evolution


def propagate(tm: TransitionMatrix, start: np.ndarray, k: int) -> np.ndarray:
    """Evolve a state distribution ``k`` steps: P^k applied iteratively."""
    if k < 0:
        raise ValueError("k must be non-negative")
    dist = np.asarray(start, dtype=float)
    if dist.shape != (tm.size,):
        raise ValueError("distribution size does not match matrix")
    for _ in range(k):
        dist = tm.matrix @ dist
    return dist


def goal_probability_vector(tm: TransitionMatrix, k: int) -> np.ndarray:
    """Per-state probability of having reached the goal by step ``k``.

    Entry i covers the i-th non-goal state (ascending original order) and
    equals the goal row of the k-step matrix restricted to non-goal
    columns: t_g + t_g (T_s + T_s^2 + ... + T_s^(k-1)).
    """
    if k < 1:
        raise ValueError("k must be >= 1")
    tg = tm.t_g
    Ts = tm.t_s
    acc = tg.copy()
    row = tg.copy()
    for _ in range(1, k):
        row = row @ Ts
        acc += row
    return acc


def goal_probability_at(tm: TransitionMatrix, dist: np.ndarray, delta_k: int) -> float:
    """Probability of being at the goal ``delta_k`` steps after ``dist``.

    Any mass already on the goal stays there (absorbing), so the result
    is that mass plus the reach probability of the non-goal remainder; a
    unit mass at the goal therefore answers 1.0 by convention.
    """
    if delta_k < 1:
        raise ValueError("delta_k must be >= 1")
    dist = np.asarray(dist, dtype=float)
    if dist.shape != (tm.size,):
        raise ValueError("distribution size does not match matrix")
    at_goal = float(dist[tm.goal_index])
    reach = goal_probability_vector(tm, delta_k) @ dist[tm._nongoal]
    return min(1.0, at_goal + float(reach))


# ----------------------------------------------------------------------
# traps and bounds


@dataclass
class TrapReport:
    """States with zero goal-reach probability, plus the time profile of
    the mass stranded in them from a reference start distribution."""

    trap_states: frozenset[int]
    trap_probability_curve: np.ndarray = field(repr=False)


def _support_children(tm: TransitionMatrix) -> list[np.ndarray]:
    """children[i] = states reachable in one step from i (nonzero column)."""
    return [np.nonzero(tm.matrix[:, i])[0] for i in range(tm.size)]


def _distances_to_goal(tm: TransitionMatrix) -> np.ndarray:
    """Reverse breadth-first distances to the goal over nonzero entries;
    unreachable states get -1."""
    n = tm.size
    parents: list[list[int]] = [[] for _ in range(n)]
    rows, cols = np.nonzero(tm.matrix)
    for r, c in zip(rows, cols):
        if r != c:
            parents[r].append(c)
    dist = np.full(n, -1, dtype=int)
    dist[tm.goal_index] = 0
    frontier = [tm.goal_index]
    d = 0
    while frontier:
        d += 1
        nxt = []
        for v in frontier:
            for u in parents[v]:
                if dist[u] < 0:
                    dist[u] = d
                    nxt.append(u)
        frontier = nxt
    return dist


def detect_traps(
    tm: TransitionMatrix,
    start: np.ndarray | None = None,
    horizon: int | None = None,
) -> TrapReport:
    """Find every non-goal state with zero goal-reach probability.

    Zero reach probability at step |S| is equivalent to falling outside
    reverse reachability from the goal over the nonzero entries of the
    matrix, which is how the set is computed.  The report's curve tracks
    the total mass inside the trap set at steps 1..horizon (default |S|)
    from ``start`` (default uniform over non-goal states).
    """
    dist = _distances_to_goal(tm)
    traps = frozenset(
        i for i in range(tm.size) if i != tm.goal_index and dist[i] < 0
    )
    n = tm.size
    horizon = horizon or n
    if start is None:
        start = np.full(n, 1.0 / max(n - 1, 1))
        start[tm.goal_index] = 0.0
        if n == 1:
            start[tm.goal_index] = 1.0
    curve = np.zeros(horizon)
    trap_idx = np.array(sorted(traps), dtype=int)
    d = np.asarray(start, dtype=float)
    for k in range(horizon):
        d = tm.matrix @ d
        curve[k] = d[trap_idx].sum() if trap_idx.size else 0.0
    return TrapReport(traps, curve)


def trap_probability(
    tm: TransitionMatrix,
    start: np.ndarray,
    k: int,
    traps: frozenset[int] | None = None,
) -> float:
    """Total probability mass inside the trap set after ``k`` steps."""
    if traps is None:
        traps = detect_traps(tm).trap_states
    if not traps:
        return 0.0
    d = propagate(tm, start, k)
    return float(d[np.array(sorted(traps), dtype=int)].sum())


def l_max(tm: TransitionMatrix) -> int | None:
    """Longest minimum path to the goal among goal-reachable states.

    None when no non-goal state can reach the goal at all.
    """
    dist = _distances_to_goal(tm)
    reachable = dist[dist > 0]
    if reachable.size == 0:
        return None
    return int(reachable.max())


def column_norm(block: np.ndarray) -> float:
    """Maximum absolute column sum (the L1-induced operator norm)."""
    if block.size == 0:
        return 0.0
    return float(np.abs(block).sum(axis=0).max())


def k_p_bound(tm: TransitionMatrix, p_thresh: float) -> float:
    """Minimum step count by which every goal-reachable state has reached
    the goal with probability at least ``p_thresh``:

        log(1 - p_thresh) / log(norm of T_s^l_max) + l_max

    Returns exactly l_max for ``p_thresh=0`` and +inf when the norm is 1.
    """
    if not (0.0 <= p_thresh < 1.0):
        raise ValueError("p_thresh must lie in [0, 1)")
    L = l_max(tm)
    if L is None:
        raise ValueError("goal unreachable from every non-goal state")
    if p_thresh == 0.0:
        return float(L)
    norm = column_norm(np.linalg.matrix_power(tm.t_s, L))
    if norm >= 1.0:
        return math.inf
    if norm == 0.0:
        return float(L)
    return math.log(1.0 - p_thresh) / math.log(norm) + L


# ----------------------------------------------------------------------
# CSV round trip


def save_matrix_csv(tm: TransitionMatrix, path: str) -> None:
    """Dense CSV with a one-line header: size, goal index."""
    with open(path, "w", encoding="utf-8") as fh:
        fh.write("%d,%d\n" % (tm.size, tm.goal_index))
        for row in tm.matrix:
            fh.write(",".join(repr(float(x)) for x in row))
            fh.write("\n")


def load_matrix_csv(path: str) -> TransitionMatrix:
    with open(path, encoding="utf-8") as fh:
        n, goal = (int(x) for x in fh.readline().strip().split(","))
        rows = [
            [float(x) for x in fh.readline().strip().split(",")] for _ in range(n)
        ]
    return TransitionMatrix(np.array(rows), goal)
