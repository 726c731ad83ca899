"""Maximum-probability planning over a hand-built model.

Two routes compete for the same goal: a short risky one and a longer
reliable one.  The planner maximises the joint probability, so the
longer route wins; the best-first variant with the band heuristic finds
the same plan with fewer node expansions on discovery-ordered models.
"""

from gap import (
    GoalSpec,
    IncidenceHypergraph,
    PolicyConfig,
    astar_infer,
    choose_action,
    infer_sequence,
)

model = IncidenceHypergraph(num_actions=2)
for name in ("gate", "swamp", "road-a", "road-b", "castle"):
    model.register_state(name)

# short route: gate -swamp-> castle, but the swamp crossing mostly fails
for _ in range(2):
    model.record(0, 0, 1)
for _ in range(8):
    model.record(0, 0, 0)
for _ in range(1):
    model.record(1, 0, 4)
for _ in range(1):
    model.record(1, 0, 1)

# long route: gate -> road-a -> road-b -> castle, each leg reliable
for _ in range(9):
    model.record(0, 1, 2)
model.record(0, 1, 0)
for _ in range(9):
    model.record(2, 0, 3)
model.record(2, 0, 2)
for _ in range(9):
    model.record(3, 0, 4)
model.record(3, 0, 3)

goal = GoalSpec.for_state(4)
plan = infer_sequence(model, 0, goal)
names = [model.registry.string_of(s) for s in plan.states]
print("best plan:", " -> ".join(names))
print("joint probability:", round(plan.joint_probability, 4))
print("as JSON:", plan.to_json(model))

cfg = PolicyConfig(exploration="least-chosen", rng_seed=1)
print("\npolicy's next action at the gate:", choose_action(model, 0, goal, cfg))

stats_d, stats_a = {}, {}
infer_sequence(model, 0, goal, stats=stats_d)
alt = astar_infer(model, 0, 4, variance_v1=4.0, stats=stats_a)
print("\nexpansions: exhaustive search", stats_d["expansions"],
      "vs banded best-first", stats_a["expansions"])
print("same probability:", alt.joint_probability == plan.joint_probability)

# goals can also be predicates over observation strings
roads = GoalSpec.for_predicate(lambda s: s.startswith("road"))
print("\nnearest road:", [model.registry.string_of(s)
                          for s in infer_sequence(model, 0, roads).states])
