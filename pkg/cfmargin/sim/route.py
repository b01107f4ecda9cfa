import math
from typing import List, Sequence, Tuple

import numpy as np

from cfmargin.exceptions import PolicyError, ScenarioSemanticError
from cfmargin.models.network import LaneNetwork, Signal


class Route:
    """
    Arclength parametrization of a connected chain of lanelet centerlines.

    Both ends extrapolate linearly, so agents that leave the mapped chain keep a reference line.
    """

    def __init__(self, network: LaneNetwork, lanelet_ids: Sequence[int]):
        if not lanelet_ids:
            raise PolicyError('empty route')
        self.lanelet_ids = tuple(lanelet_ids)
        points: List[Tuple[float, float]] = []
        self.lanelet_offsets = {}
        widths = []
        previous = None
        for lanelet_id in self.lanelet_ids:
            lanelet = network.lanelet(lanelet_id)
            if lanelet is None:
                raise ScenarioSemanticError(f'unresolved lanelet id {lanelet_id}', 'route')
            if previous is not None and lanelet_id not in previous.successors:
                raise ScenarioSemanticError(
                    f'lanelet {lanelet_id} is not a successor of {previous.id}', 'route')
            start_s = self._length_of(points)
            for point in lanelet.centerline:
                if points and math.dist(points[-1], point) < 1e-9:
                    continue
                points.append((float(point[0]), float(point[1])))
            self.lanelet_offsets.setdefault(lanelet_id, start_s)
            widths.append(lanelet.width)
            previous = lanelet
        if len(points) < 2:
            raise ScenarioSemanticError('route has no length', 'route')

        self.points = np.asarray(points, dtype=float)
        segments = np.diff(self.points, axis=0)
        self._seg_len = np.hypot(segments[:, 0], segments[:, 1])
        self._dir = segments / self._seg_len[:, None]
        self.s = np.concatenate(([0.0], np.cumsum(self._seg_len)))
        self.length = float(self.s[-1])
        self.width = float(min(widths))
        self._lo = np.zeros_like(self._seg_len)
        self._hi = self._seg_len.copy()
        self._lo[0] = -np.inf
        self._hi[-1] = np.inf

        self.signals: Tuple[Tuple[Signal, float], ...] = tuple(sorted(
            ((signal, self.lanelet_offsets[signal.lanelet] + signal.position)
             for signal in network.signals if signal.lanelet in self.lanelet_offsets),
            key=lambda item: (item[1], item[0].id),
        ))

    @staticmethod
    def _length_of(points) -> float:
        return sum(math.dist(a, b) for a, b in zip(points, points[1:]))

    def project(self, x: float, y: float) -> Tuple[float, float]:
        """Returns (arclength s, signed lateral offset d, left positive) of the closest point."""
        rel = np.array((x, y)) - self.points[:-1]
        t = np.clip(np.einsum('ij,ij->i', rel, self._dir), self._lo, self._hi)
        foot = self.points[:-1] + self._dir * t[:, None]
        gap = np.array((x, y)) - foot
        i = int(np.argmin(np.einsum('ij,ij->i', gap, gap)))
        d = self._dir[i, 0] * rel[i, 1] - self._dir[i, 1] * rel[i, 0]
        return float(self.s[i] + t[i]), float(d)

    def point_at(self, s: float) -> Tuple[float, float, float]:
        """Returns (x, y, heading) at arclength s."""
        i = int(np.searchsorted(self.s, s, side='right')) - 1
        i = min(max(i, 0), len(self._seg_len) - 1)
        offset = s - self.s[i]
        x, y = self.points[i] + self._dir[i] * offset
        return float(x), float(y), math.atan2(self._dir[i, 1], self._dir[i, 0])

    def heading_at(self, s: float) -> float:
        return self.point_at(s)[2]
