import math
from dataclasses import dataclass
from typing import Tuple

from cfmargin.models.network import Point


@dataclass(frozen=True, slots=True)
class AgentState:
    """Pose, speed and steering of one agent; ``(x, y)`` is the footprint center."""

    x: float
    y: float
    heading: float
    speed: float
    steering: float = 0.0
    length: float = 4.5
    width: float = 1.8

    @property
    def position(self) -> Point:
        return self.x, self.y

    @property
    def velocity(self) -> Point:
        return self.speed * math.cos(self.heading), self.speed * math.sin(self.heading)

    def corners(self) -> Tuple[Point, Point, Point, Point]:
        """Footprint corners, counter-clockwise starting front-left."""
        c, s = math.cos(self.heading), math.sin(self.heading)
        hl, hw = self.length / 2.0, self.width / 2.0
        local = ((hl, hw), (-hl, hw), (-hl, -hw), (hl, -hw))
        return tuple((self.x + c * lx - s * ly, self.y + s * lx + c * ly) for lx, ly in local)

    def to_body_frame(self, point: Point) -> Point:
        dx, dy = point[0] - self.x, point[1] - self.y
        c, s = math.cos(self.heading), math.sin(self.heading)
        return c * dx + s * dy, -s * dx + c * dy


@dataclass(frozen=True, slots=True)
class Command:
    acceleration: float = 0.0
    steering_rate: float = 0.0


IDLE = Command()
