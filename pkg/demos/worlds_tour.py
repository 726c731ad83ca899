"""A quick tour of the five benchmark worlds and their abstractions.

Each world speaks the same contract: reset(seed) -> observation string,
step(action) -> observation string, at_goal(), goal_predicate().  Named
observation abstractions wrap worlds without touching their dynamics.
"""

import random

from gap.environments import (
    binary_addition,
    blocksworld,
    complex_maze_taxi,
    simple_taxi,
    strips_world,
    tower_of_hanoi,
    wrap,
)

print("== fetch-and-deliver line ==")
env = strips_world()
print("start:", env.reset(6), "| optimal from canonical start:", env.optimal_steps())
print("layout:", env.export_layout())

print("\n== pickup gridworld ==")
env = simple_taxi(size=9, targets=2)
env.reset(3)
print(env.export_layout())
print("obs:", env._observe())
print("loc/2 view:   ", wrap(simple_taxi(size=9, targets=2), "loc/2").reset(3))
print("loc/1.5 view: ", wrap(simple_taxi(size=9, targets=2), "loc/1.5").reset(3))

print("\n== maze delivery ==")
env = complex_maze_taxi(width=9, height=9, rooms=1)
print(env.reset(5))
print(env.export_layout())
combo = wrap(complex_maze_taxi(width=9, height=9, rooms=1), "AII", "w/oA")
print("AII w/oA view:", combo.reset(5))

print("\n== tower puzzle ==")
from gap.environments.wrappers import _toh_ai, _toh_aii, _toh_aiii, _toh_aiv

env = tower_of_hanoi(3, 5)
obs = env.reset()
for move in ((0, 2), (0, 1), (2, 1)):
    obs = env.step(env.actions.index(move))
print("full state:", obs)
for name, fx in (("AI", _toh_ai), ("AII", _toh_aii), ("AIII", _toh_aiii), ("AIV", _toh_aiv)):
    print("%-4s view:" % name, fx(obs))

print("\n== blocks ==")
env = blocksworld(4)
print("start:", env.reset(11), "| goal reached:", env.at_goal())
rng = random.Random(0)
steps = 0
while not env.at_goal():
    env.step(rng.randrange(env.action_count()))
    steps += 1
print("random walk solved it in", steps, "moves:", env._observe())

print("\n== binary addition ==")
env = binary_addition(3)
print("start:", env.reset(4))
print("workspace:", env.export_layout())
