import pytest
from environs import Env, EnvError

from cfmargin.config import EngineConfig
from cfmargin.exceptions import ConfigError


@pytest.fixture
def clean_env(monkeypatch):
    for name in ('DT', 'VISIBILITY_RADIUS', 'EPS', 'REPS', 'GRID', 'REFINE', 'SEED', 'WORKERS',
                 'FAILURE_BUDGET', 'SEVERITY_FILE', 'LOG_LEVEL'):
        monkeypatch.delenv(f'CFM_{name}', raising=False)
    return monkeypatch


def test_defaults(clean_env):
    assert EngineConfig.from_env(Env()) == EngineConfig()


def test_values_from_environment(clean_env):
    clean_env.setenv('CFM_DT', '0.05')
    clean_env.setenv('CFM_REPS', '200')
    clean_env.setenv('CFM_WORKERS', '4')
    clean_env.setenv('CFM_SEVERITY_FILE', '/tmp/coefficients.json')
    config = EngineConfig.from_env(Env())
    assert config.dt == 0.05
    assert config.reps == 200
    assert config.workers == 4
    assert config.severity_file == '/tmp/coefficients.json'
    assert config.grid == 11


@pytest.mark.parametrize('name, value', [
    ('CFM_DT', '0'),
    ('CFM_EPS', '1.0'),
    ('CFM_REPS', '0'),
    ('CFM_GRID', '1'),
    ('CFM_REFINE', '-1'),
    ('CFM_WORKERS', '0'),
    ('CFM_FAILURE_BUDGET', '1.5'),
    ('CFM_VISIBILITY_RADIUS', '-5'),
])
def test_out_of_range_values(clean_env, name, value):
    clean_env.setenv(name, value)
    with pytest.raises(ConfigError):
        EngineConfig.from_env(Env())


def test_unparseable_value(clean_env):
    clean_env.setenv('CFM_REPS', 'many')
    with pytest.raises(EnvError):
        EngineConfig.from_env(Env())


def test_overrides_skip_none():
    config = EngineConfig().with_overrides(reps=7, eps=None, workers=None)
    assert config.reps == 7
    assert config.eps == 0.05
    with pytest.raises(ConfigError):
        EngineConfig().with_overrides(eps=0.0)
