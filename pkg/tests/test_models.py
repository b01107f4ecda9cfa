from dataclasses import replace

import pytest

from cfmargin.exceptions import AggregationError, CounterfactualError
from cfmargin.models import (
    CounterfactualAssignment, CounterfactualKind, OddDataset, Signal, clamp_intensity, validate_episode,
)


def test_well_formed_episode_has_no_violations(following_episode):
    assert validate_episode(following_episode) == []


def test_short_trajectory_is_one_length_violation(following_episode):
    e = following_episode
    short = dict(e.trajectories, follower=e.trajectories['follower'][:-1])
    violations = validate_episode(replace(e, trajectories=short))
    assert [v.field for v in violations] == ['trajectory length']
    assert violations[0].agent == 'follower'


def test_duplicate_agent_id_is_one_violation(following_episode):
    e = following_episode
    violations = validate_episode(replace(e, agents=e.agents + ('follower',)))
    assert [v.field for v in violations] == ['ids unique']


def test_unknown_ego_is_reported(following_episode):
    violations = validate_episode(replace(following_episode, ego='nobody'))
    assert [v.field for v in violations] == ['ego']


@pytest.mark.parametrize('kind, gamma, expected, clipped', [
    (CounterfactualKind.DISTRACTION, 7.0, 5.0, True),
    (CounterfactualKind.UNSEEN, 20.0, 20.0, False),
    (CounterfactualKind.AGGRESSIVENESS, 0.0, 0.0, False),
    (CounterfactualKind.IMPAIRED_REFLEXES, 1.5, 1.0, True),
])
def test_clamp_intensity(kind, gamma, expected, clipped):
    result = clamp_intensity(kind, gamma)
    assert result.value == expected
    assert result.clipped is clipped


def test_clamp_rejects_negative_intensity():
    with pytest.raises(CounterfactualError):
        clamp_intensity(CounterfactualKind.UNSEEN, -1.0)


def test_assignment_outside_range_is_rejected():
    with pytest.raises(CounterfactualError):
        CounterfactualAssignment(CounterfactualKind.ILLEGAL_PRECEDENCE, 1.5, 'ego')


def test_assignment_targets_everyone_but_the_ego():
    assign = CounterfactualAssignment(CounterfactualKind.UNSEEN, 1.0, 'ego')
    assert assign.targets(('a', 'ego', 'b')) == ('a', 'b')


@pytest.mark.parametrize('text, kind', [
    ('Distraction', CounterfactualKind.DISTRACTION),
    ('illegalprecedence', CounterfactualKind.ILLEGAL_PRECEDENCE),
    ('IMPAIRED_REFLEXES', CounterfactualKind.IMPAIRED_REFLEXES),
])
def test_kind_parsing(text, kind):
    assert CounterfactualKind.parse(text) is kind


def test_unknown_kind():
    with pytest.raises(CounterfactualError):
        CounterfactualKind.parse('Sleepy')


def test_traffic_light_cycles_with_offset():
    light = Signal('l', 'traffic_light', 1, 10.0, (('green', 10.0), ('yellow', 3.0), ('red', 10.0)), offset=5.0)
    assert light.phase_at(0.0) == 'green'
    assert light.phase_at(5.0) == 'yellow'
    assert light.phase_at(8.0) == 'red'
    assert light.phase_at(18.0) == 'green'


def test_stop_sign_always_stops():
    assert Signal('s', 'stop_sign', 1, 10.0).phase_at(123.4) == 'stop'


def test_empty_dataset_is_rejected():
    with pytest.raises(AggregationError):
        OddDataset(())
