import logging
from dataclasses import dataclass
from enum import Enum
from typing import Dict, NamedTuple

from cfmargin.exceptions import CounterfactualError

logger = logging.getLogger(__name__)


class CounterfactualKind(str, Enum):
    AGGRESSIVENESS = 'Aggressiveness'
    DISTRACTION = 'Distraction'
    ILLEGAL_PRECEDENCE = 'IllegalPrecedence'
    IMPAIRED_REFLEXES = 'ImpairedReflexes'
    UNSEEN = 'Unseen'

    @classmethod
    def parse(cls, value: str) -> 'CounterfactualKind':
        for kind in cls:
            if value.lower() in (kind.value.lower(), kind.name.lower()):
                return kind
        raise CounterfactualError(f'unknown counterfactual kind {value!r}')

    @property
    def gamma_max(self) -> float:
        return INTENSITY_RANGES[self][1]

    @property
    def stochastic(self) -> bool:
        """Only precedence draws and distraction phases consume randomness."""
        return self in (CounterfactualKind.DISTRACTION, CounterfactualKind.ILLEGAL_PRECEDENCE)


# aggressiveness λ, hold period s, violation probability, added latency s, inverse distance 1/m
INTENSITY_RANGES: Dict[CounterfactualKind, tuple] = {
    CounterfactualKind.AGGRESSIVENESS: (0.0, 1.0),
    CounterfactualKind.DISTRACTION: (0.0, 5.0),
    CounterfactualKind.ILLEGAL_PRECEDENCE: (0.0, 1.0),
    CounterfactualKind.IMPAIRED_REFLEXES: (0.0, 1.0),
    CounterfactualKind.UNSEEN: (0.0, 20.0),
}


class ClampedIntensity(NamedTuple):
    value: float
    clipped: bool


def clamp_intensity(kind: CounterfactualKind, gamma: float) -> ClampedIntensity:
    """Clips γ into the kind's range and reports whether clipping happened."""
    if not gamma >= 0:
        raise CounterfactualError(f'{kind.value}: intensity must be non-negative, got {gamma}')
    low, high = INTENSITY_RANGES[kind]
    value = min(max(gamma, low), high)
    clipped = value != gamma
    if clipped:
        logger.warning(f'{kind.value}: intensity {gamma} clipped to {value}')
    return ClampedIntensity(value, clipped)


@dataclass(frozen=True)
class CounterfactualAssignment:
    """A kind and intensity applied to every agent except the ego."""

    kind: CounterfactualKind
    intensity: float
    ego: str

    def __post_init__(self):
        low, high = INTENSITY_RANGES[self.kind]
        if not low <= self.intensity <= high:
            raise CounterfactualError(
                f'{self.kind.value}: intensity {self.intensity} outside [{low}, {high}]')

    def targets(self, agents) -> tuple:
        return tuple(a for a in agents if a != self.ego)
