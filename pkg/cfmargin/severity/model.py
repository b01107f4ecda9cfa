import logging
import math
from dataclasses import astuple, dataclass
from pathlib import Path
from typing import Iterable, Optional, Tuple

from pydantic import ValidationError
from scipy.special import expit

from cfmargin.exceptions import RecordError, SeverityError
from cfmargin.schemas.severity import SeverityCoefficients
from cfmargin.sim.collision import ContactEvent

logger = logging.getLogger(__name__)

DEFAULT_COEFFICIENTS = SeverityCoefficients()
LEX_TOLERANCE = 1e-6


@dataclass(frozen=True)
class SeverityProfile:
    p_fatal: float = 0.0
    p_mais3plus: float = 0.0
    p_mais2plus: float = 0.0

    def as_tuple(self) -> Tuple[float, float, float]:
        return astuple(self)


ZERO_PROFILE = SeverityProfile()


def load_coefficients(path: Optional[str]) -> SeverityCoefficients:
    if path is None:
        return DEFAULT_COEFFICIENTS
    try:
        return SeverityCoefficients.model_validate_json(Path(path).read_text())
    except (OSError, ValidationError) as e:
        logger.error(f'Cannot load severity coefficients from {path}', exc_info=True)
        raise RecordError(f'invalid severity coefficients file {path}: {e}') from e


def severity_at(delta_v: float, impact: str,
                coefficients: SeverityCoefficients = DEFAULT_COEFFICIENTS) -> SeverityProfile:
    if not math.isfinite(delta_v) or delta_v < 0:
        raise SeverityError(f'delta_v must be finite and non-negative, got {delta_v}')
    shift = coefficients.beta * delta_v + coefficients.modifiers[impact]
    return SeverityProfile(
        p_fatal=float(expit(coefficients.alpha_fatal + shift)),
        p_mais3plus=float(expit(coefficients.alpha_mais3 + shift)),
        p_mais2plus=float(expit(coefficients.alpha_mais2 + shift)),
    )


def severity_of(c: Optional[ContactEvent], agent_id: Optional[str] = None,
                coefficients: SeverityCoefficients = DEFAULT_COEFFICIENTS) -> SeverityProfile:
    """
    Injury-risk profile of a contact, seen from ``agent_id`` (the first agent of the pair by default).
    No contact gives the zero profile.
    """
    if c is None:
        return ZERO_PROFILE
    impact = c.impact_class_of(agent_id) if agent_id is not None else c.impact_classes[0]
    return severity_at(c.delta_v, impact, coefficients)


def lex_compare(a: SeverityProfile, b: SeverityProfile, tolerance: float = LEX_TOLERANCE) -> int:
    """1 if ``a`` is worse than ``b``, -1 if better, 0 if equal within ``tolerance`` per level."""
    for x, y in zip(a.as_tuple(), b.as_tuple()):
        if abs(x - y) <= tolerance:
            continue
        return 1 if x > y else -1
    return 0


def mean_profile(profiles: Iterable[SeverityProfile]) -> SeverityProfile:
    profiles = list(profiles)
    if not profiles:
        return ZERO_PROFILE
    n = len(profiles)
    return SeverityProfile(*(sum(level) / n for level in zip(*(p.as_tuple() for p in profiles))))
