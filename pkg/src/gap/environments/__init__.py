"""Benchmark worlds, observation abstractions, and the error injector."""

from .base import Environment, ErrorInjector, inject_error
from .binary_add import BinaryAddition, binary_addition
from .blocks import Blocksworld, blocksworld
from .hanoi import TowerOfHanoi, parse_state, state_string, tower_of_hanoi
from .maze_taxi import MazeTaxi, complex_maze_taxi
from .strips import StripsWorld, strips_world
from .taxi import SimpleTaxi, simple_taxi
from .wrappers import ObservationWrapper, wrap

_FACTORIES = {
    "strips": strips_world,
    "taxi-simple": simple_taxi,
    "taxi-maze": complex_maze_taxi,
    "toh": tower_of_hanoi,
    "blocks": blocksworld,
    "binadd": binary_addition,
}


def make_environment(
    domain: str, params: dict | None = None, abstractions: tuple[str, ...] = ()
) -> Environment:
    """Build a benchmark world by name and apply named abstractions."""
    if domain not in _FACTORIES:
        raise ValueError("unknown domain %r" % domain)
    env = _FACTORIES[domain](**(params or {}))
    if abstractions:
        env = wrap(env, *abstractions)
    return env

__all__ = [
    "Environment",
    "ErrorInjector",
    "inject_error",
    "BinaryAddition",
    "binary_addition",
    "Blocksworld",
    "blocksworld",
    "TowerOfHanoi",
    "tower_of_hanoi",
    "parse_state",
    "state_string",
    "MazeTaxi",
    "complex_maze_taxi",
    "StripsWorld",
    "strips_world",
    "SimpleTaxi",
    "simple_taxi",
    "ObservationWrapper",
    "wrap",
    "make_environment",
]
