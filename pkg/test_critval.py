"""Tests for the bridge-supremum critical values"""

import threading
import time
from concurrent.futures import ThreadPoolExecutor
from dataclasses import replace

import numpy as np
import pytest
from numpy.testing import assert_allclose, assert_array_equal
from scipy import special

from fcpd import critval, database
from fcpd.critval import (OVERSHOOT_CONSTANT, CritvalConfig, critical_value, critval_table, kolmogorov_cdf,
                          kolmogorov_quantile, simulate_bridges, simulate_sup_bridge)


def test_config_validation():
    with pytest.raises(ValueError):
        CritvalConfig(grid_size=100)
    with pytest.raises(ValueError):
        CritvalConfig(replications=500)
    with pytest.raises(ValueError):
        CritvalConfig(seed=-1)
    with pytest.raises(ValueError):
        CritvalConfig(d=0)
    assert CritvalConfig(grid_size=1024).shift == pytest.approx(OVERSHOOT_CONSTANT / 32)
    assert CritvalConfig(continuity_correction=False).shift == 0.0


def test_bridges_are_pinned():
    x, paths = simulate_bridges(50, 256, np.random.default_rng(3))
    assert x[0] == 0.0 and x[-1] == 1.0
    assert paths.shape == (50, 257)
    assert np.max(np.abs(paths[:, 0])) == 0.0
    assert np.max(np.abs(paths[:, -1])) <= 1e-12


def test_block_suprema_come_from_pinned_bridges(monkeypatch, small_critval):
    config = replace(small_critval, d=2)
    drawn = []
    real = critval.simulate_bridges

    def recording(n_paths, grid_size, rng):
        x, paths = real(n_paths, grid_size, rng)
        drawn.append(paths)
        return x, paths

    monkeypatch.setattr(critval, 'simulate_bridges', recording)
    sups = critval.block_sups(config, 0, 200)
    assert len(drawn) == 2
    for paths in drawn:
        assert paths.shape == (200, config.grid_size + 1)
        assert np.max(np.abs(paths[:, 0])) == 0.0
        assert np.max(np.abs(paths[:, -1])) <= 1e-12
    assert_allclose(sups, np.sqrt((drawn[0] ** 2 + drawn[1] ** 2).max(axis=1)), rtol=0, atol=1e-15)


def test_sup_sample_is_built_from_blocks(small_critval):
    blocks = [critval.block_sups(small_critval, b, critval.BLOCK_SIZE) for b in range(10)]
    expected = np.sort(np.concatenate(blocks)) + small_critval.shift
    assert_array_equal(simulate_sup_bridge(small_critval, threads=2), expected)


def test_sup_sample_is_sorted_and_nonnegative(small_critval):
    sample = simulate_sup_bridge(small_critval)
    assert sample.shape == (small_critval.replications,)
    assert np.all(sample >= 0.0)
    assert np.all(np.diff(sample) >= 0.0)


def test_seed_determinism_and_thread_independence(small_critval):
    one = simulate_sup_bridge(small_critval, threads=1)
    many = simulate_sup_bridge(small_critval, threads=3)
    assert_array_equal(one, many)
    other = simulate_sup_bridge(replace(small_critval, seed=8), threads=2)
    assert not np.array_equal(one, other)


def test_dimension_dominance(small_critval):
    values = [critical_value(d, 0.10, small_critval) for d in (1, 2, 3)]
    assert values[0] < values[1] < values[2]
    assert critical_value(1, 0.01, small_critval) > critical_value(1, 0.05, small_critval) > values[0]


def test_kolmogorov_quantiles():
    assert kolmogorov_quantile(0.10) == pytest.approx(1.2238, abs=1e-4)
    assert kolmogorov_quantile(0.05) == pytest.approx(1.3581, abs=1e-4)
    assert kolmogorov_quantile(0.50) == pytest.approx(0.8276, abs=1e-4)
    for alpha in (0.01, 0.10, 0.5):
        assert kolmogorov_quantile(alpha) == pytest.approx(special.kolmogi(alpha), abs=1e-8)
    with pytest.raises(ValueError):
        kolmogorov_quantile(0.0)


def test_kolmogorov_cdf_matches_scipy():
    for x in np.linspace(0.3, 3.0, 28):
        assert kolmogorov_cdf(x) == pytest.approx(1.0 - special.kolmogorov(x), abs=1e-12)
    assert kolmogorov_cdf(0.0) == 0.0


def test_cache_round_trip(small_critval):
    config = replace(small_critval, seed=31)
    first = critical_value(1, 0.10, config)
    assert database.load_critval_sample(*config.cache_key) is not None
    critval.clear_memory_cache()
    assert critical_value(1, 0.10, config) == first
    keys = database.list_critval_keys()
    assert any(k['seed'] == 31 and k['grid_size'] == config.grid_size for k in keys)


def test_is_cached(small_critval):
    config = replace(small_critval, seed=32)
    assert not critval.is_cached(config)
    critical_value(1, 0.10, config)
    assert critval.is_cached(config)
    critval.clear_memory_cache()
    assert critval.is_cached(config)


def test_key_is_simulated_once(monkeypatch, small_critval):
    config = replace(small_critval, seed=424242)
    calls = []
    real = critval._raw_sample

    def counting(cfg, threads=None):
        calls.append(cfg.cache_key)
        time.sleep(0.2)
        return real(cfg, threads)

    monkeypatch.setattr(critval, '_raw_sample', counting)
    with ThreadPoolExecutor(max_workers=4) as executor:
        samples = list(executor.map(lambda _: critval.cached_sup_sample(config), range(4)))
    assert calls == [config.cache_key]
    for sample in samples[1:]:
        assert_array_equal(sample, samples[0])


def test_cached_lookup_does_not_wait_for_other_keys(monkeypatch, small_critval):
    cached = critval.cached_sup_sample(small_critval)
    entered = threading.Event()
    release = threading.Event()

    def slow_sample(cfg, threads=None):
        entered.set()
        release.wait(timeout=30)
        return np.sort(np.random.default_rng(0).random(cfg.replications))

    monkeypatch.setattr(critval, '_raw_sample', slow_sample)
    worker = threading.Thread(target=critval.cached_sup_sample, args=(replace(small_critval, seed=987654),))
    worker.start()
    try:
        assert entered.wait(timeout=10)
        found = []
        reader = threading.Thread(target=lambda: found.append(critval.cached_sup_sample(small_critval)))
        reader.start()
        reader.join(timeout=5)
        assert not reader.is_alive()
        assert_array_equal(found[0], cached)
    finally:
        release.set()
        worker.join(timeout=30)


def test_correction_only_shifts(small_critval):
    corrected = critical_value(1, 0.10, small_critval)
    raw = critical_value(1, 0.10, replace(small_critval, continuity_correction=False))
    assert corrected - raw == pytest.approx(small_critval.shift)


def test_table(small_critval):
    table = critval_table(config=small_critval)
    assert list(table.columns) == ['d', 'alpha', 'critical_value']
    assert len(table) == 15
    for _, rows in table.groupby('d'):
        assert rows.sort_values('alpha')['critical_value'].is_monotonic_decreasing


@pytest.mark.slow
def test_default_calibration_against_series():
    config = CritvalConfig()
    sample = critval.cached_sup_sample(config)
    assert np.mean(sample) == pytest.approx(np.sqrt(np.pi / 2) * np.log(2.0), abs=0.01)
    assert critical_value(1, 0.10) == pytest.approx(1.2238, abs=0.01)
    assert critical_value(1, 0.05) == pytest.approx(1.3581, abs=0.01)


@pytest.mark.slow
def test_grid_refinement_is_stable():
    coarse = CritvalConfig(grid_size=1024, replications=400000, seed=5)
    fine = replace(coarse, grid_size=2048)
    assert abs(critical_value(1, 0.10, fine) - critical_value(1, 0.10, coarse)) <= 0.005
