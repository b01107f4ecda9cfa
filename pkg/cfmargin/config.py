from dataclasses import dataclass, replace
from typing import Optional

from environs import Env

from cfmargin.exceptions import ConfigError


@dataclass(frozen=True)
class EngineConfig:
    """
    Engine configuration.
    Holds simulation cadence, estimation settings and worker count. CLI flags override it.
    """

    dt: float = 0.1
    visibility_radius: float = 100.0
    eps: float = 0.05
    reps: int = 50
    grid: int = 11
    refine: int = 4
    seed: int = 0
    workers: int = 1
    failure_budget: float = 0.05
    severity_file: Optional[str] = None
    log_level: str = 'INFO'

    def __post_init__(self):
        problems = [
            (self.dt > 0, f'dt must be positive, got {self.dt}'),
            (self.visibility_radius > 0, f'visibility radius must be positive, got {self.visibility_radius}'),
            (0 < self.eps < 1, f'eps must lie in (0, 1), got {self.eps}'),
            (self.reps >= 1, f'reps must be at least 1, got {self.reps}'),
            (self.grid >= 2, f'a grid needs at least 2 points, got {self.grid}'),
            (self.refine >= 0, f'refine must be non-negative, got {self.refine}'),
            (self.workers >= 1, f'workers must be at least 1, got {self.workers}'),
            (0 <= self.failure_budget <= 1, f'failure budget must lie in [0, 1], got {self.failure_budget}'),
        ]
        for ok, message in problems:
            if not ok:
                raise ConfigError(message)

    def with_overrides(self, **overrides) -> 'EngineConfig':
        """Returns a copy with every non-None override applied."""
        return replace(self, **{k: v for k, v in overrides.items() if v is not None})

    @staticmethod
    def from_env(env: Env = None) -> 'EngineConfig':
        """
        Creates the EngineConfig object from environment variables.
        """
        if env is None:
            env = Env()
            env.read_env()

        return EngineConfig(
            dt=env.float('CFM_DT', 0.1),
            visibility_radius=env.float('CFM_VISIBILITY_RADIUS', 100.0),
            eps=env.float('CFM_EPS', 0.05),
            reps=env.int('CFM_REPS', 50),
            grid=env.int('CFM_GRID', 11),
            refine=env.int('CFM_REFINE', 4),
            seed=env.int('CFM_SEED', 0),
            workers=env.int('CFM_WORKERS', 1),
            failure_budget=env.float('CFM_FAILURE_BUDGET', 0.05),
            severity_file=env.str('CFM_SEVERITY_FILE', None),
            log_level=env.str('CFM_LOG_LEVEL', 'INFO'),
        )
