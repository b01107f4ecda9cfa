import json

import numpy as np
import pytest
from scipy.special import logit

from cfmargin.exceptions import RecordError, SeverityError
from cfmargin.severity.model import (
    DEFAULT_COEFFICIENTS, ZERO_PROFILE, SeverityProfile, lex_compare, load_coefficients, mean_profile, severity_at,
    severity_of,
)
from cfmargin.sim.collision import ContactEvent

CLASSES = ('front', 'side', 'rear')


@pytest.mark.parametrize('impact', CLASSES)
def test_no_impact_is_almost_harmless(impact):
    assert max(severity_at(0.0, impact).as_tuple()) <= 0.01


def test_faster_is_worse():
    slow, fast = severity_at(10.0, 'front'), severity_at(20.0, 'front')
    assert all(f > s for f, s in zip(fast.as_tuple(), slow.as_tuple()))


def test_side_impact_logit_shift():
    side, front = severity_at(15.0, 'side'), severity_at(15.0, 'front')
    for s, f in zip(side.as_tuple(), front.as_tuple()):
        assert logit(s) - logit(f) == pytest.approx(0.6)


def test_moderate_injury_midpoint():
    assert severity_at(17.0, 'front').p_mais2plus == pytest.approx(0.5)


@pytest.mark.parametrize('impact', CLASSES)
def test_nested_and_monotone(impact):
    previous = None
    for dv in np.arange(0.0, 60.5, 0.5):
        p = severity_at(float(dv), impact)
        assert p.p_fatal <= p.p_mais3plus <= p.p_mais2plus
        if previous is not None:
            assert all(b >= a for a, b in zip(previous.as_tuple(), p.as_tuple()))
        previous = p


@pytest.mark.parametrize('dv', [-1.0, float('nan'), float('inf')])
def test_invalid_delta_v(dv):
    with pytest.raises(SeverityError):
        severity_at(dv, 'front')


def test_lexicographic_order():
    a, b = SeverityProfile(0.1, 0.3, 0.5), SeverityProfile(0.1, 0.2, 0.9)
    assert lex_compare(a, b) == 1
    assert lex_compare(b, a) == -1
    assert lex_compare(a, a) == 0


def test_lexicographic_tolerance():
    a, b = SeverityProfile(0.0999999, 0.2, 0.3), SeverityProfile(0.1, 0.25, 0.3)
    assert lex_compare(a, b) == -1


def test_no_contact_is_the_zero_profile():
    assert severity_of(None) == ZERO_PROFILE
    assert lex_compare(ZERO_PROFILE, severity_at(0.0, 'rear')) == -1


def test_severity_seen_from_each_party():
    event = ContactEvent(3, ('a', 'b'), 12.0, 1.5, ('front', 'side'))
    assert severity_of(event, 'b') == severity_at(12.0, 'side')
    assert severity_of(event) == severity_at(12.0, 'front')


def test_mean_profile():
    mean = mean_profile([SeverityProfile(0.0, 0.2, 0.4), SeverityProfile(0.2, 0.4, 0.6)])
    assert mean.as_tuple() == pytest.approx((0.1, 0.3, 0.5))
    assert mean_profile([]) == ZERO_PROFILE


def test_coefficients_file(tmp_path):
    path = tmp_path / 'severity.json'
    path.write_text(json.dumps({'alpha_fatal': -9.0, 'alpha_mais3': -8.0, 'alpha_mais2': -7.0, 'beta': 0.2}))
    coefficients = load_coefficients(str(path))
    assert coefficients.beta == 0.2
    assert coefficients.modifiers == DEFAULT_COEFFICIENTS.modifiers
    assert severity_at(10.0, 'front', coefficients).p_mais2plus == pytest.approx(1 / (1 + np.exp(5.0)))


@pytest.mark.parametrize('content', [
    '{"alpha_fatal": -5.0, "alpha_mais3": -6.0}',
    '{"beta": -1}',
    '{"modifiers": {"front": 0.0}}',
    'not json',
])
def test_bad_coefficients_file(tmp_path, content):
    path = tmp_path / 'severity.json'
    path.write_text(content)
    with pytest.raises(RecordError):
        load_coefficients(str(path))


def test_missing_coefficients_file(tmp_path):
    with pytest.raises(RecordError):
        load_coefficients(str(tmp_path / 'nope.json'))


def test_default_coefficients():
    assert load_coefficients(None) is DEFAULT_COEFFICIENTS
