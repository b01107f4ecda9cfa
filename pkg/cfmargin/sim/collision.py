"""
Contact detection on oriented rectangular footprints with the separating axis theorem (SAT).
"""
import itertools
import math
from dataclasses import dataclass
from typing import Dict, List, Literal, Optional, Sequence, Tuple

from cfmargin.models.episode import Episode
from cfmargin.models.network import Point
from cfmargin.models.state import AgentState

ImpactClass = Literal['front', 'side', 'rear']
Polygon = Sequence[Point]


@dataclass(frozen=True)
class ContactEvent:
    """First contact of a pair; later contacts of the same pair are merged into it."""

    step: int
    agents: Tuple[str, str]
    delta_v: float
    impact_angle: float
    impact_classes: Tuple[ImpactClass, ImpactClass]
    last_step: Optional[int] = None

    def involves(self, agent_id: str) -> bool:
        return agent_id in self.agents

    def impact_class_of(self, agent_id: str) -> ImpactClass:
        return self.impact_classes[self.agents.index(agent_id)]


def _edge_normals(poly: Polygon) -> List[Point]:
    normals = []
    for i in range(len(poly)):
        (x1, y1), (x2, y2) = poly[i], poly[(i + 1) % len(poly)]
        normals.append((y2 - y1, x1 - x2))
    return normals


def _project(poly: Polygon, axis: Point) -> Tuple[float, float]:
    dots = [p[0] * axis[0] + p[1] * axis[1] for p in poly]
    return min(dots), max(dots)


def penetration_depth(poly_a: Polygon, poly_b: Polygon) -> float:
    """
    Smallest overlap of the two projections over all SAT axes, in meters.
    Negative values mean the polygons are separated by at least that gap along some axis.
    """
    depth = math.inf
    for nx, ny in _edge_normals(poly_a) + _edge_normals(poly_b):
        norm = math.hypot(nx, ny)
        axis = (nx / norm, ny / norm)
        min_a, max_a = _project(poly_a, axis)
        min_b, max_b = _project(poly_b, axis)
        depth = min(depth, min(max_a, max_b) - max(min_a, min_b))
    return depth


def polygons_intersect(poly_a: Polygon, poly_b: Polygon) -> bool:
    for axis in _edge_normals(poly_a) + _edge_normals(poly_b):
        min_a, max_a = _project(poly_a, axis)
        min_b, max_b = _project(poly_b, axis)
        if max_a < min_b or max_b < min_a:
            return False
    return True


def clearance(a: AgentState, b: AgentState) -> float:
    """Widest separating gap between two footprints over the SAT axes; 0 when they touch."""
    return max(0.0, -penetration_depth(a.corners(), b.corners()))


def footprints_intersect(a: AgentState, b: AgentState) -> bool:
    reach = (math.hypot(a.length, a.width) + math.hypot(b.length, b.width)) / 2.0
    if math.dist(a.position, b.position) > reach:
        return False
    return polygons_intersect(a.corners(), b.corners())


def _inside(point: Point, poly: Polygon) -> bool:
    # poly is convex and counter-clockwise
    for i in range(len(poly)):
        (x1, y1), (x2, y2) = poly[i], poly[(i + 1) % len(poly)]
        if (x2 - x1) * (point[1] - y1) - (y2 - y1) * (point[0] - x1) < -1e-12:
            return False
    return True


def _segment_crossing(p1, p2, q1, q2) -> Optional[Point]:
    rx, ry = p2[0] - p1[0], p2[1] - p1[1]
    sx, sy = q2[0] - q1[0], q2[1] - q1[1]
    denom = rx * sy - ry * sx
    if abs(denom) < 1e-12:
        return None
    qpx, qpy = q1[0] - p1[0], q1[1] - p1[1]
    t = (qpx * sy - qpy * sx) / denom
    u = (qpx * ry - qpy * rx) / denom
    if 0.0 <= t <= 1.0 and 0.0 <= u <= 1.0:
        return p1[0] + t * rx, p1[1] + t * ry
    return None


def contact_point(a: AgentState, b: AgentState) -> Point:
    """Centroid of the vertices of the overlap region (corners inside the other body and edge crossings)."""
    poly_a, poly_b = a.corners(), b.corners()
    points = [p for p in poly_a if _inside(p, poly_b)] + [p for p in poly_b if _inside(p, poly_a)]
    for i, j in itertools.product(range(4), range(4)):
        crossing = _segment_crossing(poly_a[i], poly_a[(i + 1) % 4], poly_b[j], poly_b[(j + 1) % 4])
        if crossing is not None:
            points.append(crossing)
    if not points:
        return (a.x + b.x) / 2.0, (a.y + b.y) / 2.0
    return sum(p[0] for p in points) / len(points), sum(p[1] for p in points) / len(points)


def impact_class(state: AgentState, point: Point) -> ImpactClass:
    lx, ly = state.to_body_frame(point)
    if abs(lx) / (state.length / 2.0) >= abs(ly) / (state.width / 2.0):
        return 'front' if lx >= 0 else 'rear'
    return 'side'


def _wrap_angle(angle: float) -> float:
    return abs((angle + math.pi) % (2.0 * math.pi) - math.pi)


def contact_event(step: int, id_a: str, a: AgentState, id_b: str, b: AgentState) -> ContactEvent:
    (vax, vay), (vbx, vby) = a.velocity, b.velocity
    point = contact_point(a, b)
    return ContactEvent(
        step=step,
        agents=(id_a, id_b),
        delta_v=math.hypot(vax - vbx, vay - vby),
        impact_angle=_wrap_angle(a.heading - b.heading),
        impact_classes=(impact_class(a, point), impact_class(b, point)),
        last_step=step,
    )


def check_contacts(e: Episode) -> List[ContactEvent]:
    """One ContactEvent per colliding pair, taken at its first contact step, ordered by step."""
    events: Dict[Tuple[str, str], ContactEvent] = {}
    pairs = list(itertools.combinations(e.agents, 2))
    steps = min(len(e.trajectories[a]) for a in e.agents) if e.agents else 0
    for step in range(steps):
        for id_a, id_b in pairs:
            a, b = e.trajectories[id_a][step], e.trajectories[id_b][step]
            if not footprints_intersect(a, b):
                continue
            first = events.get((id_a, id_b))
            if first is None:
                events[(id_a, id_b)] = contact_event(step, id_a, a, id_b, b)
            else:
                events[(id_a, id_b)] = ContactEvent(
                    first.step, first.agents, first.delta_v, first.impact_angle,
                    first.impact_classes, last_step=step)
    return sorted(events.values(), key=lambda c: (c.step, c.agents))


def coll(e: Episode, agent_id: str, contacts: Optional[List[ContactEvent]] = None) -> bool:
    contacts = check_contacts(e) if contacts is None else contacts
    return any(c.involves(agent_id) for c in contacts)


def first_contact_of(agent_id: str, contacts: List[ContactEvent]) -> Optional[ContactEvent]:
    """Earliest contact involving the agent; ties at the same step go to the largest Δv."""
    mine = [c for c in contacts if c.involves(agent_id)]
    if not mine:
        return None
    return min(mine, key=lambda c: (c.step, -c.delta_v, c.agents))
