import argparse
import logging
from dataclasses import dataclass, replace
from pathlib import Path
from typing import Callable, List, Optional, Sequence

from cfmargin.config import EngineConfig
from cfmargin.exceptions import RecordError
from cfmargin.formats import guess_format, parse_episode, parse_scenario
from cfmargin.margin.search import GridSpec
from cfmargin.models.counterfactual import CounterfactualKind
from cfmargin.models.episode import Episode, ScenarioFile
from cfmargin.schemas.severity import SeverityCoefficients
from cfmargin.severity.model import load_coefficients

logger = logging.getLogger(__name__)

EPISODE_SUFFIX = '.episode.jsonl'
SCENARIO_SUFFIX = '.scenario.jsonl'
FORMATS = ('csv', 'structured')


@dataclass(frozen=True)
class Command:
    """A CLI subcommand: its flags and the handler run with the parsed arguments and config."""

    name: str
    help: str
    arguments: Callable[[argparse.ArgumentParser], None]
    handler: Callable[[argparse.Namespace, EngineConfig], None]

    def attach(self, subparsers) -> argparse.ArgumentParser:
        parser = subparsers.add_parser(self.name, help=self.help)
        self.arguments(parser)
        parser.set_defaults(handler=self.handler)
        return parser


def add_output_flags(parser: argparse.ArgumentParser):
    parser.add_argument('--out', type=Path, required=True, help='output directory')
    parser.add_argument('--format', choices=FORMATS, default='csv', help='result file format')


def add_estimation_flags(parser: argparse.ArgumentParser):
    parser.add_argument('--episode', nargs='+', type=Path, required=True,
                        help=f'episode logs, or directories of *{EPISODE_SUFFIX} files')
    parser.add_argument('--kind', nargs='+', default=['all'],
                        help='counterfactual kinds, or "all"')
    parser.add_argument('--grid', type=int, help='base grid points over [0, γ_max]')
    parser.add_argument('--refine', type=int, help='bisection rounds after the first crossing')
    parser.add_argument('--eps', type=float, help='collision probability threshold')
    parser.add_argument('--reps', type=int, help='repetitions per stochastic intensity')
    parser.add_argument('--seed', type=int, help='base seed')
    parser.add_argument('--workers', type=int, help='worker processes')
    parser.add_argument('--failure-budget', type=float, help='tolerated share of failed reps per point')
    parser.add_argument('--severity-file', help='severity coefficients JSON')
    add_output_flags(parser)


def settings(args: argparse.Namespace, config: EngineConfig) -> EngineConfig:
    """Flags override the environment configuration."""
    return config.with_overrides(
        eps=getattr(args, 'eps', None),
        reps=getattr(args, 'reps', None),
        grid=getattr(args, 'grid', None),
        refine=getattr(args, 'refine', None),
        seed=getattr(args, 'seed', None),
        workers=getattr(args, 'workers', None),
        failure_budget=getattr(args, 'failure_budget', None),
        severity_file=getattr(args, 'severity_file', None),
    )


def grid_of(config: EngineConfig) -> GridSpec:
    return GridSpec(points=config.grid, refine=config.refine)


def coefficients_of(config: EngineConfig) -> SeverityCoefficients:
    return load_coefficients(config.severity_file)


def parse_kinds(values: Sequence[str]) -> List[CounterfactualKind]:
    if any(v.lower() == 'all' for v in values):
        return list(CounterfactualKind)
    kinds = []
    for value in values:
        kind = CounterfactualKind.parse(value)
        if kind not in kinds:
            kinds.append(kind)
    return kinds


def read_bytes(path: Path) -> bytes:
    try:
        return Path(path).read_bytes()
    except OSError as e:
        logger.error(f'Cannot read {path}')
        raise RecordError(f'cannot read {path}: {e.strerror or e}') from e


def expand(paths: Sequence[Path], suffix: str) -> List[Path]:
    """Files as given; directories contribute their ``suffix`` files in name order."""
    found = []
    for path in paths:
        path = Path(path)
        found.extend(sorted(path.glob(f'*{suffix}')) if path.is_dir() else [path])
    return found


def load_scenarios(paths: Sequence[Path], config: EngineConfig, format: Optional[str] = None) -> List[ScenarioFile]:
    """CommonRoad files carry no visibility radius, they get the configured one."""
    scenarios = []
    for path in expand(paths, SCENARIO_SUFFIX):
        fmt = format or guess_format(path.name)
        scenario = parse_scenario(read_bytes(path), fmt)
        if fmt != 'native':
            scenario = replace(scenario, visibility_radius=config.visibility_radius)
        scenarios.append(scenario)
    return scenarios


def load_episodes(paths: Sequence[Path]) -> List[Episode]:
    episodes = [parse_episode(read_bytes(path)) for path in expand(paths, EPISODE_SUFFIX)]
    if not episodes:
        raise RecordError(f'no episode logs found in {[str(p) for p in paths]}')
    ids = [e.episode_id for e in episodes]
    if len(set(ids)) != len(ids):
        raise RecordError('duplicate episode ids among the inputs')
    logger.info(f'loaded {len(episodes)} episodes')
    return episodes


def write_bytes(path: Path, data: bytes) -> Path:
    try:
        path.parent.mkdir(parents=True, exist_ok=True)
        path.write_bytes(data)
    except OSError as e:
        logger.error(f'Cannot write {path}')
        raise RecordError(f'cannot write {path}: {e.strerror or e}') from e
    logger.info(f'wrote {path}')
    return path
