from cfmargin.dao.base import BaseDAO
from cfmargin.schemas.records import (
    ContactRow, CriticalRow, CurveRow, HistogramRow, MarginRow, PlotRow, PointSeverityRow, ProbabilityRow,
    RankRow, SplitRow, SummaryRow, WeightRow,
)


class ProbabilityDAO(BaseDAO):
    model = ProbabilityRow
    stem = 'probability'
    order_by = ('episode_id', 'kind', 'intensity')

    @classmethod
    def stem_for(cls, mode: str) -> str:
        return f'{cls.stem}_{mode}'


class MarginDAO(BaseDAO):
    model = MarginRow
    stem = 'margins'
    order_by = ('episode_id', 'kind', 'mode')


class PointSeverityDAO(BaseDAO):
    model = PointSeverityRow
    stem = 'severity'
    order_by = ('episode_id', 'kind', 'mode', 'intensity')


class ContactDAO(BaseDAO):
    model = ContactRow
    stem = 'contacts'
    order_by = ('step', 'agent_a', 'agent_b')


class CurveDAO(BaseDAO):
    model = CurveRow
    stem = 'curves'
    order_by = ('label', 'kind', 'mode', 'intensity')


class HistogramDAO(BaseDAO):
    model = HistogramRow
    stem = 'histogram'
    order_by = ('label', 'kind', 'mode', 'low')


class SummaryDAO(BaseDAO):
    model = SummaryRow
    stem = 'summary'
    order_by = ('label', 'kind', 'mode')


class RankDAO(BaseDAO):
    model = RankRow
    stem = 'ranking'
    order_by = ('kind', 'mode', 'rank')


class CriticalDAO(BaseDAO):
    model = CriticalRow
    stem = 'critical'
    order_by = ('label', 'kind', 'mode', 'rank')


class PlotDAO(BaseDAO):
    model = PlotRow
    stem = 'plot_data'
    order_by = ('label', 'kind', 'mode', 'series', 'intensity')


class SplitDAO(BaseDAO):
    model = SplitRow
    stem = 'split'
    order_by = ('episode_id',)


class WeightDAO(BaseDAO):
    model = WeightRow
    stem = 'weights'
    order_by = ('episode_id',)
