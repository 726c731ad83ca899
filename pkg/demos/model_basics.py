"""Recording observations and reading both probability models.

Build a tiny three-state model by replaying a worked count table, then
query transition probabilities, argmax projections, and the moving-window
variant side by side.
"""

from gap import IncidenceHypergraph

# counts for one source state: rows are results, columns are actions
TABLE = {
    # (result, action): count
    (0, 0): 3, (0, 1): 1, (0, 2): 7,
    (1, 0): 2, (1, 1): 5, (1, 2): 1,
    (2, 0): 9, (2, 1): 1, (2, 2): 2,
}

model = IncidenceHypergraph(num_actions=3)
for name in ("start", "left-room", "right-room"):
    model.register_state(name)
for (result, action), count in TABLE.items():
    for _ in range(count):
        model.record(0, action, result)

print("recorded", model.total_records, "observations over",
      model.num_states, "states")

print("\noutcome share of action 0 landing in state 1 (a priori):",
      round(model.apriori_prob(0, 0, 1), 4))
print("action share of the 0->1 transition (a posteriori):",
      round(model.aposteriori_prob(0, 0, 1), 4))

action, p = model.max_action_for_transition(0, 2)
print("\nmost likely action for 0->2:", action, "with share", round(p, 3))
result, p = model.max_result_for_action(0, 2)
print("most likely result of action 2:", result, "with share", round(p, 3))

# the chains behind those answers stay sorted with O(1) work per record
chain = model._action_chains[0][2]
print("\naction chain for the 0->2 transition:", list(chain.items()))
print("rewires on the last record:", model.last_rewires)

# a windowed model forgets: after 30 more observations of action 1, a
# single fresh action-2 observation still carries a 1/10 share
windowed = IncidenceHypergraph(num_actions=3, window=10)
for name in ("start", "left-room"):
    windowed.register_state(name)
for _ in range(30):
    windowed.record(0, 1, 1)
windowed.record(0, 2, 1)
print("\nwindowed share of the fresh action:",
      round(windowed.windowed_prob(0, 2, 1, window=10), 3))

# round trip through the serialised form
windowed.save("/tmp/windowed-model.json")
print("reloaded counts match:",
      IncidenceHypergraph.load("/tmp/windowed-model.json").count(0, 1, 1)
      == windowed.count(0, 1, 1))
