from typing import Dict, List

import numpy as np
import pytest

from cfmargin.analytics.odd import aggregate, bootstrap_greater, curve_monotonicity, rank_agents, split_by_speed
from cfmargin.margin.estimate import EgoMode
from cfmargin.margin.search import GridSpec, MarginResult, safety_margin
from cfmargin.misc.synthetic import generate_suite
from cfmargin.models.counterfactual import CounterfactualKind
from cfmargin.models.episode import Episode, OddDataset
from cfmargin.sim.collision import coll
from cfmargin.sim.simulator import simulate

pytestmark = pytest.mark.slow

GRID = GridSpec(11, 2)
REPS = 20
WORKERS = 4
SEVERE_KINDS = (CounterfactualKind.DISTRACTION, CounterfactualKind.IMPAIRED_REFLEXES, CounterfactualKind.UNSEEN)
EGO_POLICIES = ('IDMAgent', 'IDMLatency2', 'IDMShortsighted10')


def _margins(episodes: List[Episode], kind: CounterfactualKind, mode: EgoMode = EgoMode()) -> List[MarginResult]:
    return [safety_margin(e, kind, mode, grid=GRID, n_reps=REPS, seed=1, workers=WORKERS) for e in episodes]


@pytest.fixture(scope='module')
def suite() -> List[Episode]:
    return [simulate(s) for s in generate_suite(24, 24, seed=7)]


@pytest.fixture(scope='module')
def non_reactive(suite) -> Dict[CounterfactualKind, List[MarginResult]]:
    return {kind: _margins(suite, kind) for kind in CounterfactualKind}


def test_nominal_suite_is_collision_free(suite):
    assert [e.episode_id for e in suite if coll(e, e.ego)] == []


@pytest.mark.parametrize('kind', list(CounterfactualKind), ids=lambda k: k.value)
def test_mean_collision_curve_rises_with_intensity(non_reactive, kind):
    curve = aggregate(non_reactive[kind]).curve
    assert len(curve.intensities) == 11
    assert curve_monotonicity(curve) >= 0.9
    assert curve.means[-1] - curve.means[0] >= 0.2


@pytest.mark.parametrize('kind', SEVERE_KINDS, ids=lambda k: k.value)
def test_high_speed_episodes_collide_more_severely(suite, non_reactive, kind):
    split = split_by_speed(OddDataset(tuple(suite)))
    crossed = [r for r in non_reactive[kind] if not r.censored]
    high = [r.severity.p_mais3plus for r in crossed if split.side_of(r.episode_id) == 'HIGH']
    low = [r.severity.p_mais3plus for r in crossed if split.side_of(r.episode_id) == 'LOW']
    assert high and low
    assert np.mean(high) > np.mean(low)
    assert bootstrap_greater(high, low) < 0.05


@pytest.mark.parametrize('kind', list(CounterfactualKind), ids=lambda k: k.value)
def test_nominal_ego_ranks_first(suite, kind):
    per_agent = {name: _margins(suite, kind, EgoMode.parse(f'policy:{name}')) for name in EGO_POLICIES}
    if sum(not r.censored for r in per_agent['IDMAgent']) < 10:
        pytest.skip(f'fewer than 10 non-censored episodes for {kind.value}')
    ranks = {r.agent: r for r in rank_agents(per_agent)}
    nominal = ranks['IDMAgent']
    for name in EGO_POLICIES[1:]:
        degraded = ranks[name]
        if degraded.mean_margin is not None:
            assert nominal.mean_margin >= degraded.mean_margin - 1e-9
        for a, b in zip(nominal.severity.as_tuple(), degraded.severity.as_tuple()):
            assert abs(a - b) < 0.1
