import math
from dataclasses import dataclass, field
from typing import Dict, List, Literal, Optional, Tuple

Point = Tuple[float, float]
SignalKind = Literal['stop_sign', 'yield_sign', 'traffic_light']
# signs report a fixed phase
SIGNAL_PHASES = ('green', 'yellow', 'red', 'stop', 'yield')
SIGN_PHASES = {'stop_sign': 'stop', 'yield_sign': 'yield'}


@dataclass(frozen=True)
class Lanelet:
    id: int
    centerline: Tuple[Point, ...]
    width: float
    successors: Tuple[int, ...] = ()

    @property
    def length(self) -> float:
        return sum(math.dist(a, b) for a, b in zip(self.centerline, self.centerline[1:]))


@dataclass(frozen=True)
class Signal:
    """
    A precedence signal with its stop line at ``position`` meters along ``lanelet``.

    Traffic lights cycle through ``phases`` (phase name, duration s), shifted by ``offset`` s.
    """

    id: str
    kind: SignalKind
    lanelet: int
    position: float
    phases: Tuple[Tuple[str, float], ...] = ()
    offset: float = 0.0

    def phase_at(self, t: float) -> str:
        if self.kind in SIGN_PHASES:
            return SIGN_PHASES[self.kind]
        if not self.phases:
            return 'stop'
        cycle = sum(duration for _, duration in self.phases)
        local = (t + self.offset) % cycle
        for phase, duration in self.phases:
            if local < duration:
                return phase
            local -= duration
        return self.phases[-1][0]


@dataclass(frozen=True)
class LaneNetwork:
    lanelets: Tuple[Lanelet, ...] = ()
    signals: Tuple[Signal, ...] = ()
    _index: Dict[int, Lanelet] = field(default_factory=dict, init=False, repr=False, compare=False)

    def __post_init__(self):
        object.__setattr__(self, '_index', {lanelet.id: lanelet for lanelet in self.lanelets})

    def lanelet(self, lanelet_id: int) -> Optional[Lanelet]:
        return self._index.get(lanelet_id)

    def violations(self) -> List[str]:
        """Lists every broken network invariant as '<element>: <message>'."""
        problems = []
        seen = set()
        for lanelet in self.lanelets:
            name = f'lanelet {lanelet.id}'
            if lanelet.id in seen:
                problems.append(f'{name}: duplicate lanelet id')
            seen.add(lanelet.id)
            if len(lanelet.centerline) < 2:
                problems.append(f'{name}: centerline needs at least 2 points')
            if not lanelet.width > 0:
                problems.append(f'{name}: width must be positive')
            for successor in lanelet.successors:
                if successor not in self._index:
                    problems.append(f'{name}: unresolved lanelet id {successor}')
        for signal in self.signals:
            name = f'signal {signal.id}'
            lanelet = self._index.get(signal.lanelet)
            if lanelet is None:
                problems.append(f'{name}: unresolved lanelet id {signal.lanelet}')
            elif not 0.0 <= signal.position <= lanelet.length:
                problems.append(f'{name}: stop line outside lanelet arclength')
            if signal.kind == 'traffic_light' and (
                    not signal.phases or any(d <= 0 for _, d in signal.phases)):
                problems.append(f'{name}: traffic light needs a positive phase schedule')
            if any(phase not in SIGNAL_PHASES[:3] for phase, _ in signal.phases):
                problems.append(f'{name}: unknown light phase')
        return problems
