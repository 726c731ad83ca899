"""Scoring state abstractions: goal preservation and the quality metric.

Transforms map true states onto abstract states.  The goal-partitioned
norms tell you two things before you ever run an agent: whether abstract
goal convergence carries back to the true goal, and how the abstraction
shifts expected steps-to-goal.
"""

import numpy as np

from gap import (
    abstract_distribution,
    abstracted_k_p_bound,
    convergence_condition,
    empirical_quality,
    make_transform,
    predicted_curve,
    quality,
)

# six true states (goal last) merged pairwise onto three abstract states
merge = make_transform(
    np.array(
        [
            [1, 1, 0, 0, 0, 0],
            [0, 0, 1, 1, 0, 0],
            [0, 0, 0, 0, 1, 1],
        ],
        dtype=float,
    )
)
print("pairwise merge: quality =", round(quality(merge), 3),
      " goal conflation =", round(convergence_condition(merge), 3))
# the last group merges a live state with the goal: conflation shows up

clean = make_transform(
    np.array(
        [
            [1, 1, 0, 0, 0, 0],
            [0, 0, 1, 1, 1, 0],
            [0, 0, 0, 0, 0, 1],
        ],
        dtype=float,
    )
)
print("goal-preserving merge: quality =", round(quality(clean), 3),
      " goal conflation =", round(convergence_condition(clean), 3))

dist = np.array([0.4, 0.1, 0.2, 0.1, 0.1, 0.1])
print("abstracted distribution:", abstract_distribution(clean, dist))

# how a norm product on either side of 1 moves the step bound
for norm in (0.8, 0.5, 0.3):
    print("norm product %.1f -> bound %.2f steps at 90%% confidence"
          % (norm, abstracted_k_p_bound(0.9, 6.0, norm)))

# the metric recovered from measurements instead of the matrix
print("\nempirical quality for k_p=10, k_pa=12, l_max=4, norm=0.5:",
      round(empirical_quality(10, 12, 4, 0.5), 4))

# expected learning-curve shape for a system with these constants
pred = predicted_curve(l_max=25.3, k_p=18.5)
print("predicted curve: k=1 -> %.1f, k=5 -> %.1f, asymptote %.1f"
      % (pred.curve(1), pred.curve(5), pred.k_p))
