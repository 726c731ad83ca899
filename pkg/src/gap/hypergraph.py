"""Incidence hypergraph world model.

Observations arrive as (source state, action, result state) triples.
Counts are conceptually a growable |S| x |S| x |A| grid; they are stored
as per-(source, result) action rows so memory scales with the number of
distinct observed transitions rather than |S|^2 (dense views are
materialised on demand).  Two families of BucketedOrderList chains are
maintained alongside the counts so that the most probable action for any
state pair, and the most probable result for any state/action pair, are
available in O(1) at all times:

* action chains: for a fixed (source, result) pair, all actions sorted
  by count.  The head is the argmax action for that transition and its
  count over the pair total gives the action-normalised probability.
* result chains: for a fixed (source, action) pair, all results sorted
  by count.  The head is the argmax result and its count over the
  action total gives the outcome-normalised probability.

A single writer owns the model during learning.  ``copy()`` produces an
independent snapshot safe to share across concurrent read-only analysis.
"""

from __future__ import annotations

import json
from dataclasses import dataclass
from typing import Callable, Iterator

import numpy as np

from .orderlist import BucketedOrderList

@dataclass(frozen=True)
class Occasion:
    """One observed step: taking ``action`` in ``source`` produced ``result``."""

    source: int
    action: int
    result: int


class StateRegistry:
    """Bijection between observation strings and dense state ids.

    Ids are assigned in discovery order and never change; registering a
    known string is idempotent.
    """

    def __init__(self) -> None:
        self._ids: dict[str, int] = {}
        self._strings: list[str] = []

    def __len__(self) -> int:
        return len(self._strings)

    def __contains__(self, observation: str) -> bool:
        return observation in self._ids

    def id_of(self, observation: str) -> int | None:
        return self._ids.get(observation)

    def string_of(self, state: int) -> str:
        return self._strings[state]

    def register(self, observation: str) -> int:
        sid = self._ids.get(observation)
        if sid is None:
            sid = len(self._strings)
            self._ids[observation] = sid
            self._strings.append(observation)
        return sid

    def strings(self) -> list[str]:
        return list(self._strings)


class IncidenceHypergraph:
    """Growable 3-D observation-count store with O(1) argmax maintenance.

    Parameters
    ----------
    num_actions:
        Fixed size of the action axis.
    window:
        Optional fixed-proportion moving-average window.  When set, a
        parallel float store is maintained per (source, result) pair so
        ``windowed_prob`` can answer above-window queries; otherwise only
        below-window queries are possible.

    The attribute ``probability_interceptor`` is an extension point: when
    set to a callable ``f(kind, source, action, result, prob) -> float``
    (kind is "apriori" or "aposteriori"), every probability lookup is
    routed through it.  It is None by default and nothing in this package
    assigns it.
    """

    def __init__(self, num_actions: int, window: int | None = None) -> None:
        if num_actions < 1:
            raise ValueError("num_actions must be >= 1")
        if window is not None and window < 1:
            raise ValueError("window must be >= 1")
        self.num_actions = num_actions
        self.registry = StateRegistry()
        # per source: result -> list of per-action counts
        self._rows: list[dict[int, list[int]]] = []
        # per source: result -> total observations of the transition
        self._pair_totals: list[dict[int, int]] = []
        # per source: observations of each action (any result)
        self._total_sa: list[list[int]] = []
        # per source: result -> chain over actions / action -> chain over results
        self._action_chains: list[dict[int, BucketedOrderList]] = []
        self._result_chains: list[dict[int, BucketedOrderList]] = []
        self._window = window
        self._wcounts: dict[tuple[int, int], np.ndarray] = {}
        # windowed outcome pools per (source, action), result -> float weight
        self._wout: dict[tuple[int, int], dict[int, float]] = {}
        self.total_records = 0
        self.last_rewires = 0
        self.untried_state_actions = 0
        self.probability_interceptor: Callable[[str, int, int, int, float], float] | None = None

    # ------------------------------------------------------------------
    # registration and growth

    @property
    def num_states(self) -> int:
        return len(self.registry)

    def __len__(self) -> int:
        return len(self.registry)

    @property
    def window(self) -> int | None:
        return self._window

    @property
    def counts(self) -> np.ndarray:
        """Dense (|S|, |S|, |A|) view of the counts, materialised on demand.

        Intended for small models (oracles, inspection); memory is
        |S|^2 * |A| machine words.
        """
        n = self.num_states
        grid = np.zeros((n, n, self.num_actions), dtype=np.int64)
        for i in range(n):
            for j, row in self._rows[i].items():
                grid[i, j, :] = row
        return grid

    def register_state(self, observation: str) -> int:
        """Return the id for ``observation``, assigning the next one if new.

        New states extend every state-indexed structure with zero entries
        in amortised O(1).
        """
        known = len(self.registry)
        sid = self.registry.register(observation)
        if sid == known:  # newly assigned
            self._rows.append({})
            self._pair_totals.append({})
            self._total_sa.append([0] * self.num_actions)
            self._action_chains.append({})
            self._result_chains.append({})
            self.untried_state_actions += self.num_actions
        return sid

    # ------------------------------------------------------------------
    # recording

    def record_occasion(self, occasion: Occasion) -> None:
        self.record(occasion.source, occasion.action, occasion.result)

    def record(self, source: int, action: int, result: int) -> None:
        """Count one observation and restore both argmax chains.

        Each call performs at most four link rewires in total (at most
        two per affected chain); ``last_rewires`` holds the exact number
        for the most recent call.
        """
        n = self.num_states
        if not (0 <= source < n and 0 <= result < n):
            raise ValueError("state ids must be registered before recording")
        if not (0 <= action < self.num_actions):
            raise ValueError("action id out of range")
        rows = self._rows[source]
        row = rows.get(result)
        if row is None:
            row = rows[result] = [0] * self.num_actions
        row[action] += 1
        totals = self._pair_totals[source]
        totals[result] = totals.get(result, 0) + 1
        sa = self._total_sa[source]
        if sa[action] == 0:
            self.untried_state_actions -= 1
        sa[action] += 1

        chains = self._action_chains[source]
        chain = chains.get(result)
        if chain is None:
            chain = chains[result] = BucketedOrderList()
        rewires = chain.increment(action)

        chains = self._result_chains[source]
        chain = chains.get(action)
        if chain is None:
            chain = chains[action] = BucketedOrderList()
        rewires += chain.increment(result)

        if self._window is not None:
            w = self._wcounts.get((source, result))
            if w is None:
                w = self._wcounts[(source, result)] = np.zeros(self.num_actions)
            if w.sum() >= self._window:
                w *= (self._window - 1) / self._window
            w[action] += 1.0
            d = self._wout.get((source, action))
            if d is None:
                d = self._wout[(source, action)] = {}
            if sum(d.values()) >= self._window:
                scale = (self._window - 1) / self._window
                for k in d:
                    d[k] *= scale
            d[result] = d.get(result, 0.0) + 1.0

        self.last_rewires = rewires
        self.total_records += 1

    # ------------------------------------------------------------------
    # probability models

    def count(self, source: int, result: int, action: int) -> int:
        row = self._rows[source].get(result)
        return row[action] if row is not None else 0

    def action_total(self, source: int, action: int) -> int:
        """Observations of ``action`` taken from ``source`` (any result)."""
        return self._total_sa[source][action]

    def transition_total(self, source: int, result: int) -> int:
        """Observations of the ``source -> result`` transition (any action)."""
        return self._pair_totals[source].get(result, 0)

    def outcome_counts(self, source: int, action: int) -> Iterator[tuple[int, int]]:
        """Yield (result, count) pairs with nonzero count for one action."""
        for result, row in self._rows[source].items():
            c = row[action]
            if c:
                yield result, c

    def apriori_prob(self, source: int, action: int, result: int) -> float:
        """P(result | source, action): outcome share of one action.

        Returns 0.0 when the (source, action) pair was never observed.
        """
        t = self._total_sa[source][action]
        p = self.count(source, result, action) / t if t else 0.0
        if self.probability_interceptor is not None:
            p = self.probability_interceptor("apriori", source, action, result, p)
        return p

    def aposteriori_prob(self, source: int, action: int, result: int) -> float:
        """P(action | source, result): action share of one transition.

        Returns 0.0 when the (source, result) transition was never observed.
        """
        t = self._pair_totals[source].get(result, 0)
        p = self.count(source, result, action) / float(t) if t else 0.0
        if self.probability_interceptor is not None:
            p = self.probability_interceptor("aposteriori", source, action, result, p)
        return p

    def windowed_prob(self, source: int, action: int, result: int, window: int) -> float:
        """Action share of a transition under a moving-average window.

        Below the window (pair total <= window) this equals
        ``aposteriori_prob``.  Above it, counts are treated as a fixed
        pool of ``window`` observations in which each new observation
        displaces a proportional share of the old ones, so one fresh
        observation always carries weight 1/window.
        """
        if window < 1:
            raise ValueError("window must be >= 1")
        total = self.transition_total(source, result)
        if total <= window:
            return self.aposteriori_prob(source, action, result)
        if self._window != window:
            raise ValueError(
                "above-window query requires a model constructed with window=%d" % window
            )
        w = self._wcounts.get((source, result))
        if w is None:
            return 0.0
        t = w.sum()
        return float(w[action]) / float(t) if t else 0.0

    # ------------------------------------------------------------------
    # maximal-likelihood projections

    def max_action_for_transition(self, source: int, result: int) -> tuple[int, float]:
        """Argmax action for ``source -> result`` and its action share.

        All-zero slices answer (0, 0.0): the implicit zero tail keeps
        ascending index order, so the head is the lowest action id.
        """
        chain = self._action_chains[source].get(result)
        if chain is None:
            return 0, 0.0
        head = chain.head()
        if head is None:
            return 0, 0.0
        action, c = head
        return action, c / float(self._pair_totals[source][result])

    def max_result_for_action(self, source: int, action: int) -> tuple[int, float]:
        """Argmax result of taking ``action`` in ``source`` and its share."""
        chain = self._result_chains[source].get(action)
        if chain is None:
            return 0, 0.0
        head = chain.head()
        if head is None:
            return 0, 0.0
        result, c = head
        return result, c / self._total_sa[source][action]

    def out_transitions(self, source: int) -> Iterator[tuple[int, int, float]]:
        """Yield (result, argmax action, probability) for observed transitions.

        The probability is the argmax action's outcome share: how often
        that action produced this result among all its recorded outcomes
        from ``source``.  Grounding the edge weight in outcomes keeps
        once-observed flukes from scoring as certainties, which is what
        makes the transition-projection graph plannable.
        """
        totals = self._total_sa[source]
        for result, chain in self._action_chains[source].items():
            head = chain.head()
            if head is not None:
                action, c = head
                yield result, action, c / totals[action]

    def out_actions(self, source: int) -> Iterator[tuple[int, int, float]]:
        """Yield (action, argmax result, probability) for taken actions.

        Probability is the outcome share of the argmax result, i.e. the
        edge weight of the action-projection graph.
        """
        totals = self._total_sa[source]
        for action, chain in self._result_chains[source].items():
            head = chain.head()
            if head is not None:
                result, c = head
                yield action, result, c / totals[action]

    def action_use_counts(self, source: int) -> np.ndarray:
        """How often each action has been taken from ``source`` (copy)."""
        return np.asarray(self._total_sa[source])

    def out_transitions_windowed(self, source: int) -> Iterator[tuple[int, int, float]]:
        """Windowed variant of ``out_transitions``: the argmax action per
        transition comes from the windowed action pool and its weight is
        the windowed outcome share, so recent observations dominate."""
        for result, chain in self._action_chains[source].items():
            w = self._wcounts.get((source, result))
            if w is None:
                continue
            action = int(w.argmax())
            if w[action] <= 0.0:
                continue
            d = self._wout.get((source, action))
            if not d:
                continue
            total = sum(d.values())
            share = d.get(result, 0.0)
            if share > 0.0 and total > 0.0:
                yield result, action, share / total

    def out_actions_windowed(self, source: int) -> Iterator[tuple[int, int, float]]:
        """Windowed variant of ``out_actions``."""
        for action in range(self.num_actions):
            d = self._wout.get((source, action))
            if not d:
                continue
            result = max(d, key=lambda j: (d[j], -j))
            total = sum(d.values())
            if d[result] > 0.0 and total > 0.0:
                yield action, result, d[result] / total

    # ------------------------------------------------------------------
    # snapshots and serialisation

    def copy(self) -> "IncidenceHypergraph":
        """Deep, independent snapshot for concurrent read-only analysis."""
        import copy as _copy

        return _copy.deepcopy(self)

    def save(self, path: str) -> None:
        """Write a versioned JSON image: header plus nonzero count triples."""
        triples = []
        for i in range(self.num_states):
            for j in sorted(self._rows[i]):
                row = self._rows[i][j]
                for a in range(self.num_actions):
                    if row[a]:
                        triples.append([i, j, a, row[a]])
        payload = {
            "format": "gap-model",
            "version": 1,
            "num_actions": self.num_actions,
            "states": self.registry.strings(),
            "counts": triples,
        }
        with open(path, "w", encoding="utf-8") as fh:
            json.dump(payload, fh)

    @classmethod
    def load(cls, path: str) -> "IncidenceHypergraph":
        """Rebuild a model from ``save`` output; counts round-trip exactly.

        Chain order among equal counts is reconstructed deterministically
        from the counts (ties by ascending key), which preserves every
        argmax invariant though not necessarily the byte-level order the
        original replay produced.
        """
        with open(path, encoding="utf-8") as fh:
            payload = json.load(fh)
        if payload.get("format") != "gap-model" or payload.get("version") != 1:
            raise ValueError("unrecognised model file: %s" % path)
        model = cls(payload["num_actions"])
        for s in payload["states"]:
            model.register_state(s)
        by_pair: dict[tuple[int, int], list[tuple[int, int]]] = {}
        by_sa: dict[tuple[int, int], list[tuple[int, int]]] = {}
        for i, j, a, c in payload["counts"]:
            rows = model._rows[i]
            row = rows.get(j)
            if row is None:
                row = rows[j] = [0] * model.num_actions
            row[a] = c
            totals = model._pair_totals[i]
            totals[j] = totals.get(j, 0) + c
            if model._total_sa[i][a] == 0:
                model.untried_state_actions -= 1
            model._total_sa[i][a] += c
            model.total_records += c
            by_pair.setdefault((i, j), []).append((a, c))
            by_sa.setdefault((i, a), []).append((j, c))
        for (i, j), pairs in by_pair.items():
            model._action_chains[i][j] = _chain_from_counts(pairs)
        for (i, a), pairs in by_sa.items():
            model._result_chains[i][a] = _chain_from_counts(pairs)
        return model

    # ------------------------------------------------------------------
    # integrity checks (used by tests; cheap enough for assertions)

    def check_consistency(self) -> bool:
        """Recompute cached totals and chain contents from the rows."""
        n = self.num_states
        for i in range(n):
            recomputed = [0] * self.num_actions
            for j, row in self._rows[i].items():
                if any(c < 0 for c in row):
                    return False
                if self._pair_totals[i].get(j, 0) != sum(row):
                    return False
                for a in range(self.num_actions):
                    recomputed[a] += row[a]
            if recomputed != self._total_sa[i]:
                return False
        for i in range(n):
            for j, chain in self._action_chains[i].items():
                if not chain.is_sorted() or not chain.check_handles():
                    return False
                for a, c in chain.items():
                    if self.count(i, j, a) != c:
                        return False
            for a, chain in self._result_chains[i].items():
                if not chain.is_sorted() or not chain.check_handles():
                    return False
                for j, c in chain.items():
                    if self.count(i, j, a) != c:
                        return False
        return True


def _chain_from_counts(pairs: list[tuple[int, int]]) -> BucketedOrderList:
    chain = BucketedOrderList()
    for key, count in sorted(pairs, key=lambda kc: (-kc[1], kc[0])):
        chain.order.append(key)
        chain.pos[key] = len(chain.order) - 1
        chain.counts[key] = count
        if count not in chain.run_first:
            chain.run_first[count] = len(chain.order) - 1
    return chain
