from abc import ABC, abstractmethod
from dataclasses import dataclass
from typing import Any, Optional, Tuple

import numpy as np

from cfmargin.models.state import AgentState, Command
from cfmargin.schemas.params import KinematicModel
from cfmargin.sim.observation import Observation
from cfmargin.sim.route import Route


@dataclass(frozen=True)
class PolicyContext:
    """Per-agent facts a policy is built against."""

    agent_id: str
    route: Route
    model: KinematicModel
    dt: float
    recorded: Optional[Tuple[AgentState, ...]] = None


class Policy(ABC):
    """
    Driving policy π_i: observation in, command out.

    Instances are stateless and may be shared; everything that changes during a run lives in
    the memory object returned by ``reset`` and threaded through ``step``.
    """

    def reset(self, obs: Observation, rng: np.random.Generator) -> Any:
        return None

    @abstractmethod
    def step(self, obs: Observation, memory: Any) -> Tuple[Command, Any]:
        ...
