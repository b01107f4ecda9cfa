"""
Observation filters wrapped around a base policy.

A filter sees only the observation crossing the policy interface and keeps its own per-run
memory, so it composes with any base policy.
"""
import math
from collections import deque
from dataclasses import dataclass, field, replace
from typing import Any, List, Sequence, Tuple

import numpy as np

from cfmargin.agents.base import Policy
from cfmargin.models.state import Command
from cfmargin.sim.observation import Observation


class ObservationFilter:
    """Identity filter; subclasses override ``apply``."""

    def reset(self, obs: Observation, rng: np.random.Generator) -> Any:
        return None

    def apply(self, obs: Observation, memory: Any) -> Observation:
        return obs


@dataclass(frozen=True)
class DelayFilter(ObservationFilter):
    """Hands the policy the observation from ``steps`` steps ago; the buffer starts full of the first one."""

    steps: int

    def reset(self, obs: Observation, rng: np.random.Generator) -> deque:
        return deque([obs] * (self.steps + 1), maxlen=self.steps + 1)

    def apply(self, obs: Observation, memory: deque) -> Observation:
        if self.steps == 0:
            return obs
        memory.append(obs)
        return memory[0]


@dataclass(frozen=True)
class RangeFilter(ObservationFilter):
    """Drops nearby agents whose centers are farther than ``radius`` meters."""

    radius: float

    def apply(self, obs: Observation, memory: Any) -> Observation:
        me = obs.state.position
        kept = tuple(item for item in obs.nearby if math.dist(me, item[1].position) <= self.radius)
        if len(kept) == len(obs.nearby):
            return obs
        return replace(obs, nearby=kept)


@dataclass
class ChainMemory:
    observation: List[Any] = field(default_factory=list)
    base: Any = None


@dataclass(frozen=True)
class FilterChain(Policy):
    base: Policy
    observation_filters: Tuple[ObservationFilter, ...] = ()

    def reset(self, obs: Observation, rng: np.random.Generator) -> ChainMemory:
        memory = ChainMemory()
        for f in self.observation_filters:
            memory.observation.append(f.reset(obs, rng))
        memory.base = self.base.reset(obs, rng)
        return memory

    def filter_observation(self, obs: Observation, memory: ChainMemory) -> Observation:
        for f, m in zip(self.observation_filters, memory.observation):
            obs = f.apply(obs, m)
        return obs

    def step(self, obs: Observation, memory: ChainMemory) -> Tuple[Command, ChainMemory]:
        seen = self.filter_observation(obs, memory)
        command, memory.base = self.base.step(seen, memory.base)
        return command, memory

    def wrap(self, observation_filters: Sequence[ObservationFilter]) -> 'FilterChain':
        return FilterChain(self.base, self.observation_filters + tuple(observation_filters))


def with_filters(policy: Policy, observation_filters: Sequence[ObservationFilter] = ()) -> FilterChain:
    if isinstance(policy, FilterChain):
        return policy.wrap(observation_filters)
    return FilterChain(policy, tuple(observation_filters))


def steps_for(seconds: float, dt: float) -> int:
    """Nearest whole number of steps, halves rounding up."""
    return int(math.floor(seconds / dt + 0.5 + 1e-9))
