import csv

import pytest

from cfmargin.main import EXIT_INPUT, main

FAST = ['--kind', 'Unseen', '--grid', '3', '--refine', '1', '--reps', '2']


@pytest.fixture
def workspace(tmp_path, monkeypatch):
    for name in ('DT', 'VISIBILITY_RADIUS', 'EPS', 'REPS', 'GRID', 'REFINE', 'SEED', 'WORKERS', 'LOG_LEVEL'):
        monkeypatch.delenv(f'CFM_{name}', raising=False)
    monkeypatch.chdir(tmp_path)
    return tmp_path


@pytest.fixture
def episodes(workspace):
    assert main(['generate', '--high', '1', '--low', '1', '--seed', '3', '--out', str(workspace / 'scenarios')]) == 0
    assert len(list((workspace / 'scenarios').glob('*.scenario.jsonl'))) == 2
    assert main(['simulate', '--scenario', str(workspace / 'scenarios'), '--out', str(workspace / 'episodes')]) == 0
    assert len(list((workspace / 'episodes').glob('*.episode.jsonl'))) == 2
    assert len(list((workspace / 'episodes').glob('*.contacts.csv'))) == 2
    return workspace / 'episodes'


def test_sweep_writes_margins(workspace, episodes):
    out = workspace / 'results' / 'IDM'
    assert main(['sweep', '--episode', str(episodes), *FAST, '--out', str(out)]) == 0
    with open(out / 'margins.csv', newline='') as f:
        rows = list(csv.DictReader(f))
    assert len(rows) == 2
    assert {r['kind'] for r in rows} == {'Unseen'}
    assert {r['mode'] for r in rows} == {'non_reactive'}
    assert (out / 'probability_non_reactive.csv').exists()
    assert (out / 'severity.csv').exists()


def test_sweep_is_reproducible(workspace, episodes):
    for name in ('a', 'b'):
        assert main(['sweep', '--episode', str(episodes), *FAST, '--out', str(workspace / name)]) == 0
    for name in ('margins.csv', 'probability_non_reactive.csv', 'severity.csv'):
        assert (workspace / 'a' / name).read_bytes() == (workspace / 'b' / name).read_bytes()


@pytest.mark.slow
def test_sweep_bytes_do_not_depend_on_the_worker_count(workspace, episodes):
    args = ['--kind', 'Unseen', 'IllegalPrecedence', '--grid', '3', '--refine', '1', '--reps', '4']
    for workers in (1, 4, 16):
        out = workspace / f'w{workers}'
        assert main(['sweep', '--episode', str(episodes), *args, '--workers', str(workers), '--out', str(out)]) == 0
    for name in ('margins.csv', 'probability_non_reactive.csv', 'severity.csv'):
        expected = (workspace / 'w1' / name).read_bytes()
        assert (workspace / 'w4' / name).read_bytes() == expected
        assert (workspace / 'w16' / name).read_bytes() == expected


def test_structured_output(workspace, episodes):
    out = workspace / 'structured'
    assert main(['sweep', '--episode', str(episodes), *FAST, '--format', 'structured', '--out', str(out)]) == 0
    assert len((out / 'margins.jsonl').read_text().splitlines()) == 2


def test_aggregate(workspace, episodes):
    results = workspace / 'results' / 'IDM'
    assert main(['sweep', '--episode', str(episodes), *FAST, '--out', str(results)]) == 0
    out = workspace / 'odd'
    assert main(['aggregate', '--results', str(results), '--episode', str(episodes), '--grid', '3', '--refine', '1',
                 '--out', str(out)]) == 0
    for name in ('curves.csv', 'histogram.csv', 'summary.csv', 'critical.csv', 'plot_data.csv', 'split.csv'):
        assert (out / name).exists()
    with open(out / 'curves.csv', newline='') as f:
        assert {r['label'] for r in csv.DictReader(f)} >= {'IDM'}


def test_malformed_scenario_is_an_input_error(workspace):
    bad = workspace / 'bad.scenario.jsonl'
    bad.write_bytes(b'{"record": "header"\n')
    assert main(['simulate', '--scenario', str(bad), '--out', str(workspace / 'out')]) == EXIT_INPUT


def test_unknown_kind_is_an_input_error(workspace, episodes):
    args = ['sweep', '--episode', str(episodes), '--kind', 'Teleport', '--out', str(workspace / 'r')]
    assert main(args) == EXIT_INPUT


def test_missing_episode_is_an_input_error(workspace):
    assert main(['sweep', '--episode', str(workspace / 'nowhere.episode.jsonl'), '--out', str(workspace)]) == EXIT_INPUT


def test_bad_environment_is_an_input_error(workspace, monkeypatch):
    monkeypatch.setenv('CFM_EPS', '2')
    assert main(['generate', '--high', '1', '--low', '0', '--out', str(workspace)]) == EXIT_INPUT


@pytest.mark.slow
def test_bounds(workspace):
    assert main(['generate', '--high', '1', '--low', '0', '--seed', '3', '--out', str(workspace / 's')]) == 0
    assert main(['simulate', '--scenario', str(workspace / 's'), '--out', str(workspace / 'e')]) == 0
    out = workspace / 'bounds'
    assert main(['bounds', '--episode', str(workspace / 'e'), *FAST, '--out', str(out)]) == 0
    with open(out / 'margins.csv', newline='') as f:
        rows = {r['mode']: r for r in csv.DictReader(f)}
    assert set(rows) == {'non_reactive', 'best_response'}
    lower, upper = (float(rows[m]['margin'] or 'inf') for m in ('non_reactive', 'best_response'))
    assert lower <= upper
