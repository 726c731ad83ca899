"""State-abstraction transforms and their quality metrics.

An abstraction transform maps true states onto abstract states: column i
of the |abstract| x |true| matrix is the probability distribution the
i-th true state is mapped through.  Its pseudoinverse (computed from the
normal equations, requiring full row rank) converts abstract-space
dynamics back to the true space, and a handful of norm expressions over
the goal-partitioned blocks quantify what the abstraction does to goal
convergence and to expected steps-to-goal:

* ``convergence_condition``: mass the pseudoinverse routes from non-goal
  abstract states into the true goal; zero means goal convergence in the
  abstract space carries over to the true space.
* ``quality``: reciprocal product of the L1-induced norms of the two
  non-goal blocks; above 1 the abstraction can accelerate convergence,
  below 1 it slows it.
* ``empirical_quality``: the same quantity recovered from measured
  asymptotic step counts instead of the matrix itself.
* ``predicted_curve``: the offset-reciprocal learning-curve form implied
  by uniform-start incremental learning.
"""

from __future__ import annotations

import math
from dataclasses import dataclass
from functools import cached_property
from typing import Callable, Sequence as Seq

import numpy as np

from .markov import column_norm

_COLUMN_TOL = 1e-9
_COND_LIMIT = 1e8
_IDENTITY_TOL = 1e-6


class DependentColumns(ValueError):
    """The transform is rank-deficient: two abstract states carry
    indistinguishable mapping profiles, so no pseudoinverse exists."""


@dataclass
class AbstractionTransform:
    """A column-stochastic map from true states to abstract states,
    bundled with its pseudoinverse and goal partition indices.

    ``true_goal`` and ``abstract_goal`` default to the last index of each
    space; the goal-partitioned blocks strip that row/column pair.
    """

    matrix: np.ndarray
    pseudoinverse: np.ndarray
    true_goal: int
    abstract_goal: int

    @property
    def num_abstract(self) -> int:
        return self.matrix.shape[0]

    @property
    def num_true(self) -> int:
        return self.matrix.shape[1]

    @cached_property
    def _nongoal_abstract(self) -> np.ndarray:
        return np.array(
            [i for i in range(self.num_abstract) if i != self.abstract_goal], dtype=int
        )

    @cached_property
    def _nongoal_true(self) -> np.ndarray:
        return np.array(
            [i for i in range(self.num_true) if i != self.true_goal], dtype=int
        )

    @cached_property
    def a_ts(self) -> np.ndarray:
        """Non-goal block of the forward map."""
        return self.matrix[np.ix_(self._nongoal_abstract, self._nongoal_true)]

    @cached_property
    def a_tg(self) -> np.ndarray:
        """Non-goal-abstract rows of the true-goal column."""
        return self.matrix[self._nongoal_abstract, self.true_goal]

    @cached_property
    def pinv_ts(self) -> np.ndarray:
        """Non-goal block of the pseudoinverse."""
        return self.pseudoinverse[np.ix_(self._nongoal_true, self._nongoal_abstract)]

    @cached_property
    def pinv_tg(self) -> np.ndarray:
        """Goal partition of the pseudoinverse: the mass it routes from the
        abstract goal back onto non-goal true states."""
        return self.pseudoinverse[self._nongoal_true, self.abstract_goal]


def make_transform(
    mapping: np.ndarray | Seq[Seq[float]],
    true_goal: int | None = None,
    abstract_goal: int | None = None,
) -> AbstractionTransform:
    """Build a transform from per-true-state distributions.

    ``mapping`` is either the |abstract| x |true| matrix itself or a
    sequence of |true| distributions, each of length |abstract| (stacked
    as columns).  Every distribution must sum to 1.  The pseudoinverse is
    solved from the normal equations of the row space; rank deficiency
    (condition number above 1e8, or a failed identity check) raises
    DependentColumns.
    """
    A = np.asarray(mapping, dtype=float)
    if A.ndim != 2:
        raise ValueError("mapping must be two-dimensional")
    if isinstance(mapping, (list, tuple)) and not isinstance(mapping[0], np.ndarray):
        # a sequence of per-true-state distributions: stack as columns
        A = A.T
    n_abstract, n_true = A.shape
    if n_abstract > n_true:
        raise ValueError("abstract space cannot exceed the true space")
    if (A < -_COLUMN_TOL).any():
        raise ValueError("mapping probabilities must be non-negative")
    if np.abs(A.sum(axis=0) - 1.0).max() > _COLUMN_TOL:
        raise ValueError("each per-state distribution must sum to 1")

    gram = A @ A.T
    if np.linalg.cond(gram) > _COND_LIMIT:
        raise DependentColumns("transform is rank-deficient")
    pinv = np.linalg.solve(gram, A).T
    identity_gap = np.abs(A @ pinv - np.eye(n_abstract)).max()
    if identity_gap > _IDENTITY_TOL:
        raise DependentColumns(
            "pseudoinverse identity check failed (gap %.3g)" % identity_gap
        )
    tg = n_true - 1 if true_goal is None else true_goal
    ag = n_abstract - 1 if abstract_goal is None else abstract_goal
    if not (0 <= tg < n_true and 0 <= ag < n_abstract):
        raise ValueError("goal indices out of range")
    return AbstractionTransform(A, pinv, tg, ag)


def abstract_distribution(t: AbstractionTransform, dist: np.ndarray) -> np.ndarray:
    """Map a true-state distribution into the abstract space."""
    dist = np.asarray(dist, dtype=float)
    if dist.shape != (t.num_true,):
        raise ValueError("distribution size does not match the transform")
    return t.matrix @ dist


def convergence_condition(t: AbstractionTransform) -> float:
    """L1 mass the pseudoinverse routes from the abstract goal onto
    non-goal true states.  Zero means certainty of the abstract goal maps
    back to certainty of the true goal, so the abstraction preserves goal
    convergence; anything above zero measures goal conflation."""
    return float(np.abs(t.pinv_tg).sum())


def quality(t: AbstractionTransform) -> float:
    """Reciprocal product of the non-goal block norms, 1.0 for identity."""
    return 1.0 / (column_norm(t.a_ts) * column_norm(t.pinv_ts))


def empirical_quality(
    k_p: float, k_p_alpha: float, l_max: float, t_alpha_norm: float
) -> float:
    """Recover the quality metric from measured step counts.

    ``t_alpha_norm`` is the L1 norm of the abstracted non-goal transition
    block; the exponent compares the abstracted asymptote against the
    plain one on the scale set by the distance between the plain
    asymptote and the longest minimum path.
    """
    if not (0.0 < t_alpha_norm < 1.0):
        raise ValueError("t_alpha_norm must lie in (0, 1)")
    if k_p <= l_max:
        raise ValueError("k_p must exceed l_max")
    return t_alpha_norm ** ((k_p - k_p_alpha) / (k_p - l_max))


def abstracted_k_p_bound(p_thresh: float, l_max: float, norm_product: float) -> float:
    """Threshold step bound with the abstraction's norm product in place
    of the plain transition norm:

        log(1 - p_thresh) / log(norm_product) + l_max

    +inf when the norm product reaches 1 with a positive threshold.
    """
    if not (0.0 <= p_thresh < 1.0):
        raise ValueError("p_thresh must lie in [0, 1)")
    if norm_product <= 0.0:
        raise ValueError("norm_product must be positive")
    if p_thresh == 0.0:
        return float(l_max)
    if norm_product >= 1.0:
        return math.inf
    return math.log(1.0 - p_thresh) / math.log(norm_product) + l_max


@dataclass
class LearningCurvePrediction:
    """Offset-reciprocal learning-curve form: starts at 2*l_max - k_p and
    decays toward the asymptotic mean k_p as 1/k."""

    l_max: float
    k_p: float
    curve: Callable[[float], float]


def predicted_curve(l_max: float, k_p: float) -> LearningCurvePrediction:
    """Expected mean steps-to-goal as a function of epoch number:

        curve(k) = 2 (l_max - k_p) / k + k_p
    """

    def curve(k: float) -> float:
        return 2.0 * (l_max - k_p) / k + k_p

    return LearningCurvePrediction(l_max, k_p, curve)


# ----------------------------------------------------------------------
# CSV round trip


def save_transform_csv(t: AbstractionTransform, path: str) -> None:
    """Dense CSV with a header line: sizes and goal indices."""
    with open(path, "w", encoding="utf-8") as fh:
        fh.write(
            "%d,%d,%d,%d\n" % (t.num_abstract, t.num_true, t.true_goal, t.abstract_goal)
        )
        for row in t.matrix:
            fh.write(",".join(repr(float(x)) for x in row))
            fh.write("\n")


def load_transform_csv(path: str) -> AbstractionTransform:
    with open(path, encoding="utf-8") as fh:
        n_abs, n_true, tg, ag = (int(x) for x in fh.readline().strip().split(","))
        rows = [
            [float(x) for x in fh.readline().strip().split(",")] for _ in range(n_abs)
        ]
    A = np.array(rows)
    if A.shape != (n_abs, n_true):
        raise ValueError("matrix shape does not match header")
    return make_transform(A, true_goal=tg, abstract_goal=ag)
