from cfmargin.models.counterfactual import (
    ClampedIntensity,
    CounterfactualAssignment,
    CounterfactualKind,
    INTENSITY_RANGES,
    clamp_intensity,
)
from cfmargin.models.episode import (
    AgentSpec,
    Episode,
    OddDataset,
    ScenarioFile,
    Violation,
    validate_episode,
)
from cfmargin.models.network import Lanelet, LaneNetwork, Signal
from cfmargin.models.state import AgentState, Command, IDLE
