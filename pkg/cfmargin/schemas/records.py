from typing import Annotated, List, Literal, Optional, Tuple, Union

from pydantic import BaseModel, ConfigDict, Field, TypeAdapter

from cfmargin.schemas.params import KinematicModel, PolicySpec

SCENARIO_FORMAT = 'cfmargin_scenario_v1'
EPISODE_FORMAT = 'cfmargin_episode_v1'


class Record(BaseModel):
    model_config = ConfigDict(extra='forbid', allow_inf_nan=False)


class StateFields(Record):
    x: float
    y: float
    heading: float
    speed: float
    steering: float = 0.0
    length: float = 4.5
    width: float = 1.8


class ScenarioHeader(Record):
    record: Literal['scenario'] = 'scenario'
    format: Literal['cfmargin_scenario_v1'] = SCENARIO_FORMAT
    scenario_id: str
    ego: Optional[str] = None
    duration: float = Field(gt=0)
    dt: float = Field(gt=0)
    seed: int = 0
    visibility_radius: float = Field(100.0, gt=0)


class EpisodeHeader(Record):
    record: Literal['episode'] = 'episode'
    format: Literal['cfmargin_episode_v1'] = EPISODE_FORMAT
    episode_id: str
    ego: str
    dt: float = Field(gt=0)
    horizon: int = Field(ge=0)
    visibility_radius: float = Field(100.0, gt=0)
    truncation: Optional[str] = None


class LaneletRecord(Record):
    record: Literal['lanelet'] = 'lanelet'
    id: int
    centerline: List[Tuple[float, float]]
    width: float
    successors: List[int] = []


class SignalRecord(Record):
    record: Literal['signal'] = 'signal'
    id: str
    kind: Literal['stop_sign', 'yield_sign', 'traffic_light']
    lanelet: int
    position: float
    phases: List[Tuple[str, float]] = []
    offset: float = 0.0


class AgentRecord(Record):
    record: Literal['agent'] = 'agent'
    id: str
    route: List[int]
    policy: PolicySpec = PolicySpec()
    model: KinematicModel = KinematicModel()
    initial: Optional[StateFields] = None


class StateRecord(StateFields):
    record: Literal['state'] = 'state'
    step: int = Field(ge=0)
    agent: str


class PhaseRecord(Record):
    record: Literal['phase'] = 'phase'
    step: int = Field(ge=0)
    signal: str
    phase: str


AnyRecord = Annotated[
    Union[ScenarioHeader, EpisodeHeader, LaneletRecord, SignalRecord, AgentRecord, StateRecord, PhaseRecord],
    Field(discriminator='record'),
]
record_adapter = TypeAdapter(AnyRecord)


class ResultRow(BaseModel):
    """A row of a result file. Field order is the column order."""

    model_config = ConfigDict(frozen=True, extra='forbid')


class ProbabilityRow(ResultRow):
    episode_id: str
    kind: str
    intensity: float
    reps: int
    collisions: int
    p_hat: float
    ci_low: float
    ci_high: float
    failures: int


class MarginRow(ResultRow):
    episode_id: str
    kind: str
    mode: str
    margin: Optional[float] = None
    censored: bool
    grid_resolution: float
    p_fatal_at_margin: float
    p_mais3_at_margin: float
    p_mais2_at_margin: float


class PointSeverityRow(ResultRow):
    episode_id: str
    kind: str
    mode: str
    intensity: float
    p_fatal: float
    p_mais3: float
    p_mais2: float


class ContactRow(ResultRow):
    step: int
    agent_a: str
    agent_b: str
    delta_v: float
    impact_angle: float
    class_a: str
    class_b: str
    last_step: int


class CurveRow(ResultRow):
    label: str
    kind: str
    mode: str
    intensity: float
    mean: float
    half_width: float
    count: int


class HistogramRow(ResultRow):
    label: str
    kind: str
    mode: str
    bucket: str
    low: Optional[float] = None
    high: Optional[float] = None
    count: int


class SummaryRow(ResultRow):
    label: str
    kind: str
    mode: str
    episodes: int
    censored_fraction: float
    mean_margin: Optional[float] = None
    weighted_risk: float
    monotonicity: Optional[float] = None
    p_fatal_at_margin: float
    p_mais3_at_margin: float
    p_mais2_at_margin: float


class RankRow(ResultRow):
    kind: str
    mode: str
    rank: int
    agent: str
    mean_margin: Optional[float] = None
    censored_fraction: float
    episodes: int
    p_fatal_at_margin: float
    p_mais3_at_margin: float
    p_mais2_at_margin: float
    note: str = ''


class CriticalRow(ResultRow):
    label: str
    kind: str
    mode: str
    rank: int
    episode_id: str
    margin: Optional[float] = None
    censored: bool


class PlotRow(ResultRow):
    label: str
    kind: str
    mode: str
    series: str
    intensity: float
    value: float
    half_width: float = 0.0


class SplitRow(ResultRow):
    episode_id: str
    side: str
    mean_initial_speed: float
    threshold: float


class WeightRow(ResultRow):
    episode_id: str
    weight: float = Field(ge=0)
