"""
Policy-agnostic counterfactual filters. They only rewrite what the wrapped policy observes.
"""
import math
from dataclasses import dataclass, field, replace
from typing import Dict, Optional

import numpy as np

from cfmargin.agents.filters import ObservationFilter
from cfmargin.sim.collision import clearance
from cfmargin.sim.observation import Observation

ATTENTIVE_WINDOW = 0.5  # s


@dataclass
class DistractionMemory:
    phase: float
    held: Optional[Observation] = None


@dataclass(frozen=True)
class DistractionFilter(ObservationFilter):
    """
    Freezes the whole observation, own state and clock included, for ``hold`` seconds, then
    refreshes it every step of an attentive window, repeating. A memoryless policy repeats the
    command it chose when attention lapsed.
    """

    hold: float
    attentive: float = ATTENTIVE_WINDOW

    @property
    def cycle(self) -> float:
        return self.hold + self.attentive

    def reset(self, obs: Observation, rng: np.random.Generator) -> DistractionMemory:
        return DistractionMemory(phase=float(rng.uniform(0.0, self.cycle)), held=obs)

    def distracted(self, t: float, memory: DistractionMemory) -> bool:
        return self.hold > 0 and math.fmod(t + memory.phase, self.cycle) < self.hold

    def apply(self, obs: Observation, memory: DistractionMemory) -> Observation:
        if not self.distracted(obs.time, memory):
            memory.held = obs
            return obs
        return memory.held


@dataclass(frozen=True)
class UnseenFilter(ObservationFilter):
    """
    Removes ``target`` from the observation unless the gap between the two footprints is below
    1/``inverse_distance`` m.
    """

    target: str
    inverse_distance: float

    @property
    def threshold(self) -> float:
        return math.inf if self.inverse_distance == 0 else 1.0 / self.inverse_distance

    def apply(self, obs: Observation, memory=None) -> Observation:
        for agent_id, state in obs.nearby:
            if agent_id == self.target and clearance(obs.state, state) >= self.threshold:
                return obs.without(agent_id)
        return obs


@dataclass
class PrecedenceMemory:
    rng: np.random.Generator
    ignored: Dict[str, bool] = field(default_factory=dict)


@dataclass(frozen=True)
class IllegalPrecedenceFilter(ObservationFilter):
    """
    On first sight of each precedence signal, decides once with probability ``probability``
    to ignore it for the rest of the run. Ignored signals vanish from the observation.
    """

    probability: float

    def reset(self, obs: Observation, rng: np.random.Generator) -> PrecedenceMemory:
        return PrecedenceMemory(rng)

    def apply(self, obs: Observation, memory: PrecedenceMemory) -> Observation:
        for signal in obs.signals:
            if signal.id not in memory.ignored:
                memory.ignored[signal.id] = bool(memory.rng.random() < self.probability)
        kept = tuple(s for s in obs.signals if not memory.ignored[s.id])
        if len(kept) == len(obs.signals):
            return obs
        return replace(obs, signals=kept)
