from typing import Literal, Tuple

from pydantic import BaseModel, ConfigDict, Field, model_validator

POLICY_NAMES = ('IDMAgent', 'IDMLatency2', 'IDMShortsighted10', 'Replay', 'BestResponse')
PolicyName = Literal['IDMAgent', 'IDMLatency2', 'IDMShortsighted10', 'Replay', 'BestResponse']


class KinematicModel(BaseModel):
    """Kinematic bicycle parameters and actuation bounds of one agent."""

    model_config = ConfigDict(frozen=True, extra='forbid')

    wheelbase: float = Field(2.7, gt=0)
    a_min: float = -8.0
    a_max: float = 4.0
    omega_min: float = -0.5
    omega_max: float = 0.5
    delta_max: float = Field(0.6, gt=0)
    v_max: float = Field(40.0, gt=0)

    @model_validator(mode='after')
    def check_bounds(self) -> 'KinematicModel':
        if not self.a_min < 0 < self.a_max:
            raise ValueError('acceleration bounds must satisfy a_min < 0 < a_max')
        if not self.omega_min < self.omega_max:
            raise ValueError('steering rate bounds must satisfy omega_min < omega_max')
        return self


class IdmParams(BaseModel):
    model_config = ConfigDict(frozen=True, extra='forbid')

    desired_speed: float = Field(13.9, gt=0)
    time_headway: float = Field(1.5, gt=0)
    min_spacing: float = Field(2.0, gt=0)
    max_accel: float = Field(1.5, gt=0)
    comfort_decel: float = Field(2.0, gt=0)
    exponent: float = Field(4.0, gt=0)
    aggressiveness: float = Field(0.0, ge=0, le=1)
    hard_decel: float = Field(8.0, gt=0)
    # s between conflict-zone occupancies a driver accepts at a sign; negative accepts overlap
    critical_gap: float = 0.5


class CommandSegment(BaseModel):
    """A piecewise-constant command held for ``steps`` simulation steps."""

    model_config = ConfigDict(frozen=True, extra='forbid')

    acceleration: float
    steering_rate: float
    steps: int = Field(ge=0)


class PolicySpec(BaseModel):
    model_config = ConfigDict(frozen=True, extra='forbid')

    name: PolicyName = 'IDMAgent'
    idm: IdmParams = IdmParams()
    segments: Tuple[CommandSegment, ...] = ()

    @model_validator(mode='after')
    def check_parameters(self) -> 'PolicySpec':
        if self.segments and self.name != 'BestResponse':
            raise ValueError(f'command segments are only valid for BestResponse, not {self.name}')
        return self

    @property
    def is_idm(self) -> bool:
        return self.name in ('IDMAgent', 'IDMLatency2', 'IDMShortsighted10')
