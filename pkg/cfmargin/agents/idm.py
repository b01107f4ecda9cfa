"""
Intelligent Driver Model with an aggressiveness knob.

    a_idm = a · [1 − (v/v0)^δ − (s*/s)²],   s* = s0 + v·T + v·Δv / (2√(ab))
"""
import logging
import math
from typing import Optional

from cfmargin.exceptions import PolicyError
from cfmargin.schemas.params import IdmParams

logger = logging.getLogger(__name__)

# (time headway s, min spacing m, max accel m/s², comfortable decel m/s²) at λ = 1
AGGRESSIVE_PRESET = (0.5, 0.5, 3.0, 4.0)
AGGRESSIVE_SPEED_GAIN = 0.3
AGGRESSIVE_CRITICAL_GAP = -2.0  # s


def desired_gap(p: IdmParams, v: float, delta_v: float) -> float:
    return p.min_spacing + v * p.time_headway + v * delta_v / (2.0 * math.sqrt(p.max_accel * p.comfort_decel))


def equilibrium_gap(p: IdmParams, v: float) -> float:
    """Net gap at which a follower holds speed ``v`` behind a leader at the same speed."""
    free = 1.0 - (v / p.desired_speed) ** p.exponent
    if free <= 0.0:
        raise PolicyError(f'no car-following equilibrium at {v} m/s above the desired speed {p.desired_speed}')
    return desired_gap(p, v, 0.0) / math.sqrt(free)


def idm_accel(p: IdmParams, v: float, gap: Optional[float] = None, delta_v: float = 0.0) -> float:
    """
    IDM acceleration for speed ``v``, net ``gap`` to the leader and closing speed ``delta_v``.

    ``gap=None`` means free road. A non-positive gap returns the hard deceleration floor.
    """
    free = 1.0 - (max(v, 0.0) / p.desired_speed) ** p.exponent
    if gap is None:
        return max(p.max_accel * free, -p.hard_decel)
    if gap <= 0.0:
        logger.debug(f'non-positive gap {gap:.3f} m, emergency deceleration')
        return -p.hard_decel
    s_star = max(desired_gap(p, v, delta_v), 0.0)
    accel = p.max_accel * (free - (s_star / gap) ** 2)
    return max(accel, -p.hard_decel)


def apply_aggressiveness(p: IdmParams, aggressiveness: float) -> IdmParams:
    """Moves the parameters linearly toward the aggressive preset; λ = 0 returns ``p`` unchanged."""
    if not 0.0 <= aggressiveness <= 1.0:
        raise PolicyError(f'aggressiveness must lie in [0, 1], got {aggressiveness}')
    if aggressiveness == 0.0:
        return p
    lam = aggressiveness
    headway, spacing, accel, decel = AGGRESSIVE_PRESET
    return p.model_copy(update=dict(
        time_headway=p.time_headway + lam * (headway - p.time_headway),
        min_spacing=p.min_spacing + lam * (spacing - p.min_spacing),
        max_accel=p.max_accel + lam * (accel - p.max_accel),
        comfort_decel=p.comfort_decel + lam * (decel - p.comfort_decel),
        desired_speed=p.desired_speed * (1.0 + AGGRESSIVE_SPEED_GAIN * lam),
        critical_gap=p.critical_gap + lam * (AGGRESSIVE_CRITICAL_GAP - p.critical_gap),
        aggressiveness=lam,
    ))
