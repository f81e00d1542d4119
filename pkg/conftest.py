import os

import numpy as np
import pytest

from fcpd import critval, database
from fcpd.critval import CritvalConfig

# Small Monte Carlo settings for tests that only need some critical value
SMALL_CRITVAL = CritvalConfig(grid_size=256, replications=10000, seed=7)


@pytest.fixture(scope='session', autouse=True)
def isolated_cache(tmp_path_factory):
    """Point the critical value cache and the results database at a temporary directory"""
    cache_dir = tmp_path_factory.mktemp('fcpd-cache')
    previous = {k: os.environ.get(k) for k in ('FCPD_CACHE_DIR', 'FCPD_DATABASE_URL')}
    os.environ['FCPD_CACHE_DIR'] = str(cache_dir)
    os.environ['FCPD_DATABASE_URL'] = f"sqlite:///{cache_dir / 'test.sqlite'}"
    database.reset_engine()
    critval.clear_memory_cache()
    yield cache_dir
    database.reset_engine()
    critval.clear_memory_cache()
    for key, value in previous.items():
        if value is None:
            os.environ.pop(key, None)
        else:
            os.environ[key] = value


@pytest.fixture
def rng():
    return np.random.default_rng(12345)


@pytest.fixture
def small_critval():
    return SMALL_CRITVAL
