from typing import Any, Optional


class CfmarginError(Exception):
    """Base class for every error raised by cfmargin."""


class ScenarioParseError(CfmarginError):
    def __init__(self, message: str, line: Optional[int] = None, offset: Optional[int] = None):
        self.line = line
        self.offset = offset
        where = ''
        if line is not None:
            where = f' (line {line}' + (f', offset {offset})' if offset is not None else ')')
        elif offset is not None:
            where = f' (offset {offset})'
        super().__init__(f'{message}{where}')


class ScenarioSemanticError(CfmarginError):
    def __init__(self, message: str, element: str):
        self.element = element
        super().__init__(f'{element}: {message}')


class DynamicsError(CfmarginError, ValueError):
    pass


class PolicyError(CfmarginError):
    pass


class SimulationError(CfmarginError):
    """A policy failed mid-run. ``partial`` holds the episode recorded up to ``step``."""

    def __init__(self, message: str, step: int, agent_id: str, partial: Any = None):
        self.step = step
        self.agent_id = agent_id
        self.partial = partial
        super().__init__(f'step {step}, agent {agent_id}: {message}')


class CounterfactualError(CfmarginError):
    pass


class EstimationError(CfmarginError):
    def __init__(self, message: str, point: Any = None):
        self.point = point
        super().__init__(message)


class BestResponseError(CfmarginError):
    pass


class RecordError(CfmarginError):
    pass


class SeverityError(CfmarginError, ValueError):
    pass


class AggregationError(CfmarginError, ValueError):
    pass


class ConfigError(CfmarginError, ValueError):
    pass
