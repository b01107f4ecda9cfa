import pytest

from cfmargin.exceptions import CounterfactualError, EstimationError
from cfmargin.margin.estimate import EgoMode, MarginProblem, ProbabilityPoint, estimate_collision_prob
from cfmargin.margin.workers import parallel_map
from cfmargin.models.counterfactual import CounterfactualKind
from cfmargin.schemas.params import PolicySpec

UNSEEN = CounterfactualKind.UNSEEN
PRECEDENCE = CounterfactualKind.ILLEGAL_PRECEDENCE


def test_blind_follower_always_collides(following_episode):
    point = estimate_collision_prob(MarginProblem(following_episode, UNSEEN), 20.0, n_reps=10)
    assert point.reps == 1
    assert point.p_hat == 1.0
    assert point.crosses(0.05)
    assert point.ci_low == pytest.approx(0.2065, abs=1e-3)
    assert point.ci_high == pytest.approx(1.0)
    assert point.severity.p_mais2plus > 0.0


def test_zero_intensity_is_safe(following_episode):
    point = estimate_collision_prob(MarginProblem(following_episode, UNSEEN), 0.0, n_reps=10)
    assert (point.reps, point.collisions) == (1, 0)
    assert not point.crosses(0.05)


def test_stochastic_kind_uses_every_rep(crossing_episode):
    problem = MarginProblem(crossing_episode, PRECEDENCE)
    point = estimate_collision_prob(problem, 1.0, n_reps=4, seed=2)
    assert (point.reps, point.collisions) == (4, 4)
    assert estimate_collision_prob(problem, 0.0, n_reps=4).reps == 1


def test_same_seed_same_point(crossing_episode):
    problem = MarginProblem(crossing_episode, PRECEDENCE)
    assert estimate_collision_prob(problem, 0.5, 6, seed=9) == estimate_collision_prob(problem, 0.5, 6, seed=9)


def test_reps_must_be_positive(following_episode):
    with pytest.raises(EstimationError):
        estimate_collision_prob(MarginProblem(following_episode, UNSEEN), 1.0, n_reps=0)


def test_probability_point_defaults():
    point = ProbabilityPoint(intensity=0.3, reps=0, collisions=0)
    assert point.p_hat == 0.0
    assert point.usable


@pytest.mark.parametrize('text, mode, policy', [
    ('replay', 'non_reactive', None),
    ('best-response', 'best_response', None),
    ('policy:IDMLatency2', 'reactive', 'IDMLatency2'),
])
def test_ego_mode_parsing(text, mode, policy):
    assert EgoMode.parse(text) == EgoMode(mode, policy)


@pytest.mark.parametrize('text', ['policy:Teleport', 'whatever'])
def test_bad_ego_mode(text):
    with pytest.raises(CounterfactualError):
        EgoMode.parse(text)


def test_reactive_ego_keeps_its_idm_parameters(crossing_episode):
    spec = EgoMode.parse('policy:IDMShortsighted10').ego_policy(crossing_episode)
    assert spec.name == 'IDMShortsighted10'
    assert spec.idm == crossing_episode.specs['ego'].policy.idm
    assert EgoMode().ego_policy(crossing_episode) == PolicySpec(name='Replay')


def test_parallel_map_keeps_input_order():
    assert parallel_map(abs, range(-12, 0), workers=3) == list(range(12, 0, -1))
    assert parallel_map(abs, [], workers=3) == []


def test_worker_count_does_not_change_the_point(crossing_episode):
    problem = MarginProblem(crossing_episode, PRECEDENCE)
    serial = estimate_collision_prob(problem, 0.5, n_reps=6, seed=4)
    assert estimate_collision_prob(problem, 0.5, n_reps=6, seed=4, workers=2) == serial
