from typing import Dict

from pydantic import BaseModel, ConfigDict, Field, model_validator


class SeverityCoefficients(BaseModel):
    """
    Logistic injury-risk coefficients: p_level = expit(alpha_level + beta·Δv + modifier[class]).

    Levels share ``beta`` and ``alpha_fatal ≤ alpha_mais3 ≤ alpha_mais2``, which keeps the
    levels nested for every Δv.

    ``beta`` is 0.35, not the 0.19 of frontal-crash fits. MAIS2+ is anchored at 50% for
    Δv = 17 m/s; with a slope of 0.19 that anchor gives alpha_mais2 ≈ -3.23 and a risk of about
    3.8% at Δv = 0, while every level must stay below 1% there. At 0.35 the front MAIS2+ risk
    at rest is 0.26% and the side one 0.47%.
    """

    model_config = ConfigDict(frozen=True, extra='forbid')

    alpha_fatal: float = -8.5
    alpha_mais3: float = -7.2
    alpha_mais2: float = -5.95
    beta: float = Field(0.35, ge=0)
    modifiers: Dict[str, float] = {'front': 0.0, 'side': 0.6, 'rear': -0.4}

    @model_validator(mode='after')
    def check_nesting(self) -> 'SeverityCoefficients':
        if not self.alpha_fatal <= self.alpha_mais3 <= self.alpha_mais2:
            raise ValueError('alphas must satisfy alpha_fatal <= alpha_mais3 <= alpha_mais2')
        missing = {'front', 'side', 'rear'} - set(self.modifiers)
        if missing:
            raise ValueError(f'missing impact class modifiers: {sorted(missing)}')
        return self
