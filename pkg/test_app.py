"""Tests for the Flask results service"""

import numpy as np
import pytest

import app as app_module
from app import app
from fcpd.critval import CritvalConfig, critical_value
from fcpd.database import complete_run, create_run

SMALL = {'replications': 10000, 'grid_size': 256, 'seed': 7}


@pytest.fixture
def client():
    app.config['TESTING'] = True
    with app.test_client() as client:
        yield client


def test_detect_constant_sample(client):
    coefficients = np.tile(np.arange(25, dtype=float), (20, 1)).tolist()
    response = client.post('/api/detect', json={'coefficients': coefficients, 'critval': SMALL})
    assert response.status_code == 200
    report = response.get_json()
    assert report['statistic'] == 'inf'
    assert report['reject'] is True


def test_detect_random_sample(client):
    coefficients = np.random.default_rng(3).standard_normal((60, 5)).tolist()
    response = client.post('/api/detect', json={'coefficients': coefficients, 'trace': True, 'critval': SMALL})
    assert response.status_code == 200
    report = response.get_json()
    assert len(report['trace']) == 59
    assert report['reject'] == (report['statistic'] > report['critical_value'])


def test_detect_curves(client):
    grid = np.linspace(0.0, 1.0, 101)
    rng = np.random.default_rng(8)
    curves = (rng.standard_normal((30, 1)) * np.sin(np.pi * grid) + rng.standard_normal((30, 1))).tolist()
    response = client.post('/api/detect', json={'curves': curves, 'p': 5, 'aligned': True, 'critval': SMALL})
    assert response.status_code == 200
    assert response.get_json()['aligned'] is True


def test_detect_bad_requests(client):
    assert client.post('/api/detect', data='not json', content_type='text/plain').status_code == 400
    assert client.post('/api/detect', json={'values': [[1.0]]}).status_code == 400
    short = np.random.default_rng(0).standard_normal((5, 25)).tolist()
    response = client.post('/api/detect', json={'coefficients': short, 'critval': SMALL})
    assert response.status_code == 400
    assert 'at least 10' in response.get_json()['error']


def test_runs(client):
    run_id = create_run('simulate', 5, {'command': 'simulate', 'params': {'replications': 100}, 'seeds': [5]})
    complete_run(run_id, {'rows': [], 'critical_value': 1.22})

    listed = client.get('/api/runs').get_json()
    assert run_id in [run['id'] for run in listed]
    assert all('results' not in run for run in listed)

    run = client.get(f'/api/run/{run_id}').get_json()
    assert run['completed'] is True
    assert run['results']['critical_value'] == 1.22

    assert client.get('/api/run/999999').status_code == 404


def test_critval_endpoints(client):
    response = client.get('/api/critval?d=1&alpha=0.10&replications=10000&grid_size=256&seed=7')
    assert response.status_code == 200
    assert 1.1 <= response.get_json()['critical_value'] <= 1.35

    keys = client.get('/api/critval/cache').get_json()
    assert any(k['replications'] == 10000 and k['grid_size'] == 256 and k['seed'] == 7 for k in keys)

    assert client.get('/api/critval?alpha=1.5&replications=10000&grid_size=256').status_code == 400
    assert client.get('/api/critval?replications=10&grid_size=256').status_code == 400


def test_critval_requests_are_bounded(client):
    too_many = client.get('/api/critval?replications=10000000&grid_size=256')
    assert too_many.status_code == 400
    assert 'not cached' in too_many.get_json()['error']
    assert client.get('/api/critval?grid_size=100000&replications=10000').status_code == 400
    assert client.get('/api/critval?d=6&replications=10000&grid_size=256').status_code == 400

    coefficients = np.random.default_rng(4).standard_normal((30, 5)).tolist()
    response = client.post('/api/detect', json={'coefficients': coefficients,
                                                'critval': {'replications': 10 ** 8, 'grid_size': 256}})
    assert response.status_code == 400


def test_oversized_config_served_when_cached(client):
    config = CritvalConfig(d=6, grid_size=256, replications=10000, seed=7)
    expected = critical_value(6, 0.10, config)
    response = client.get('/api/critval?d=6&alpha=0.10&replications=10000&grid_size=256&seed=7')
    assert response.status_code == 200
    assert response.get_json()['critical_value'] == pytest.approx(expected)


def test_critval_cache_reports_database_errors(client, monkeypatch):
    def broken():
        raise RuntimeError('database is locked')

    monkeypatch.setattr(app_module, 'list_critval_keys', broken)
    response = client.get('/api/critval/cache')
    assert response.status_code == 500
    assert response.get_json() == {'error': 'database is locked'}
