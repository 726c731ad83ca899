"""Certifying a learned model's dynamics with absorbing-chain analysis.

Train an agent on the tower puzzle, summarise its greedy policy as a
column-stochastic matrix with the goal absorbing, and read off the
certificates: time-evolved reach probabilities, trap states, the longest
minimum path, and threshold step bounds.
"""

from gap import (
    ExperimentConfig,
    build_transition_matrix,
    detect_traps,
    goal_probability_at,
    goal_probability_vector,
    k_p_bound,
    l_max,
    propagate,
    run_experiment,
    unit_distribution,
)
from gap.markov import save_matrix_csv

models = {}
cfg = ExperimentConfig(
    domain="toh",
    domain_params={"pegs": 3, "disks": 3},
    error_rate=0.10,
    epochs=10,
    trials=1,
    seed=2,
    exploration="least-chosen",
    familiarization_epochs=2,
)
run_experiment(cfg, model_sink=lambda t, m: models.update({t: m}))
model = models[0]
goal_id = model.registry.id_of("[[],[],[1,2,3]]")
tm = build_transition_matrix(model, goal_id)
print("matrix size:", tm.size, " goal column is absorbing:",
      tm.matrix[goal_id, goal_id] == 1.0)

start = unit_distribution(tm.size, model.registry.id_of("[[1,2,3],[],[]]"))
for k in (1, 7, 15, 30):
    print("mass on the goal after %2d steps: %.3f"
          % (k, propagate(tm, start, k)[goal_id]))

reach = goal_probability_vector(tm, 15)
print("\nworst-state reach probability by step 15: %.3f" % reach.min())
print("probability the start reaches goal within 10 more steps: %.3f"
      % goal_probability_at(tm, start, 10))

report = detect_traps(tm)
print("\ntrap states:", sorted(report.trap_states) or "none")
print("longest minimum path to goal:", l_max(tm))
for p in (0.5, 0.9, 0.99):
    print("steps until every state reaches goal with prob >= %.2f: %.1f"
          % (p, k_p_bound(tm, p)))

save_matrix_csv(tm, "/tmp/policy-matrix.csv")
print("\nmatrix exported to /tmp/policy-matrix.csv")
