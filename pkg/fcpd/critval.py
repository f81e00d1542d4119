"""
Critical values for sup_{0<=x<=1} (sum_{r<=d} B_r(x)^2)^{1/2}

B_1, ..., B_d are independent Brownian bridges. The distribution is simulated
on a uniform grid: each bridge is a scaled Gaussian random walk W minus x W(1).
Replications are drawn in fixed blocks of 1000, block b using the stream
SeedSequence([seed, b]), so the sample does not depend on the worker count.

A supremum over grid points underestimates the continuous supremum by about
beta / sqrt(grid_size) with beta = -zeta(1/2) / sqrt(2 pi). With
``continuity_correction`` this shift is added to every simulated value.

For d = 1 the distribution is Kolmogorov's, with the series
P(sup|B| <= x) = 1 - 2 sum_{k>=1} (-1)^{k-1} exp(-2 k^2 x^2), used as an oracle.
"""

import logging
import threading
from concurrent.futures import ThreadPoolExecutor
from dataclasses import dataclass, replace
from typing import Dict, Iterable, Optional, Tuple

import numpy as np
import pandas as pd
from scipy import optimize

from fcpd import database
from fcpd.config import get_threads

logger = logging.getLogger(__name__)

# Bump when the sampling scheme changes so stale cache rows are ignored
CACHE_VERSION = '1'
BLOCK_SIZE = 1000
# -zeta(1/2) / sqrt(2 pi)
OVERSHOOT_CONSTANT = 0.5825971579390106
MAX_SEED = 2 ** 63 - 1

_memory_cache: Dict[Tuple, np.ndarray] = {}
_key_locks: Dict[Tuple, threading.Lock] = {}
_registry_lock = threading.Lock()


@dataclass(frozen=True)
class CritvalConfig:
    d: int = 1
    grid_size: int = 2048
    replications: int = 200000
    seed: int = 20240601
    continuity_correction: bool = True

    def __post_init__(self):
        if self.d < 1:
            raise ValueError(f"d must be >= 1, got {self.d}")
        if self.grid_size < 256:
            raise ValueError(f"grid_size must be >= 256, got {self.grid_size}")
        if self.replications < 10000:
            raise ValueError(f"replications must be >= 10000, got {self.replications}")
        if not 0 <= self.seed <= MAX_SEED:
            raise ValueError(f"seed must lie in [0, 2^63), got {self.seed}")

    @property
    def cache_key(self) -> Tuple:
        return (self.d, self.grid_size, self.replications, self.seed, CACHE_VERSION)

    @property
    def shift(self) -> float:
        return OVERSHOOT_CONSTANT / np.sqrt(self.grid_size) if self.continuity_correction else 0.0


def simulate_bridges(n_paths: int, grid_size: int, rng: np.random.Generator) -> Tuple[np.ndarray, np.ndarray]:
    """
    Brownian bridge paths on the grid k / grid_size, k = 0..grid_size

    Returns:
        (grid, paths) with paths of shape (n_paths, grid_size + 1)
    """
    x = np.arange(grid_size + 1) / grid_size
    W = np.zeros((n_paths, grid_size + 1))
    W[:, 1:] = np.cumsum(rng.standard_normal((n_paths, grid_size)), axis=1) / np.sqrt(grid_size)
    return x, W - x * W[:, -1:]


def block_sups(config: CritvalConfig, block: int, size: int) -> np.ndarray:
    """Grid suprema of one block, drawn from the stream SeedSequence([seed, block])"""
    rng = np.random.default_rng(np.random.SeedSequence([config.seed, block]))
    squares = np.zeros((size, config.grid_size + 1))
    for _ in range(config.d):
        _, B = simulate_bridges(size, config.grid_size, rng)
        squares += B * B
    return np.sqrt(squares.max(axis=1))


def _raw_sample(config: CritvalConfig, threads: Optional[int] = None) -> np.ndarray:
    """Sorted grid suprema without the continuity correction"""
    threads = threads or get_threads()
    n_blocks = -(-config.replications // BLOCK_SIZE)
    sizes = [min(BLOCK_SIZE, config.replications - b * BLOCK_SIZE) for b in range(n_blocks)]
    logger.info(f"Simulating {config.replications} bridge suprema (d={config.d}, grid={config.grid_size}, "
                f"blocks={n_blocks}, threads={threads})")

    with ThreadPoolExecutor(max_workers=threads) as executor:
        blocks = list(executor.map(lambda b: block_sups(config, b, sizes[b]), range(n_blocks)))
    return np.sort(np.concatenate(blocks))


def simulate_sup_bridge(config: CritvalConfig = None, threads: Optional[int] = None) -> np.ndarray:
    """
    Monte Carlo sample of the bridge supremum

    Args:
        config: dimension, grid, replication count and seed
        threads: worker count (result does not depend on it)

    Returns:
        sorted array of ``config.replications`` sup values
    """
    config = config or CritvalConfig()
    return _raw_sample(config, threads) + config.shift


def _key_lock(key: Tuple) -> threading.Lock:
    with _registry_lock:
        return _key_locks.setdefault(key, threading.Lock())


def is_cached(config: CritvalConfig) -> bool:
    """True when the sample for ``config`` is in memory or in the database"""
    key = config.cache_key
    return key in _memory_cache or database.has_critval_sample(*key)


def cached_sup_sample(config: CritvalConfig = None) -> np.ndarray:
    """
    simulate_sup_bridge backed by the in-process and database caches

    A key is simulated at most once; lookups of other keys never wait on it.
    """
    config = config or CritvalConfig()
    key = config.cache_key
    raw = _memory_cache.get(key)
    if raw is None:
        with _key_lock(key):
            raw = _memory_cache.get(key)
            if raw is None:
                raw = database.load_critval_sample(*key)
                if raw is not None:
                    logger.debug(f"Critical value sample loaded from database for {key}")
            if raw is None:
                raw = _raw_sample(config)
                database.save_critval_sample(*key, raw)
            _memory_cache[key] = raw
    return raw + config.shift


def clear_memory_cache():
    with _registry_lock:
        _memory_cache.clear()


def critical_value(d: int, alpha: float, config: CritvalConfig = None) -> float:
    """
    Upper alpha quantile of the supremum for dimension d

    ``config.d`` is overridden by ``d``.
    """
    if not 0.0 < alpha < 1.0:
        raise ValueError(f"alpha must lie in (0, 1), got {alpha}")
    config = replace(config or CritvalConfig(), d=d)
    return float(np.quantile(cached_sup_sample(config), 1.0 - alpha))


def kolmogorov_cdf(x: float, terms: int = 100) -> float:
    """P(sup |B| <= x) by the alternating series, switching to the Jacobi theta form for small x"""
    if x <= 0:
        return 0.0
    k = np.arange(1, terms + 1)
    if x < 0.5:
        odd = 2 * k - 1
        return float(np.sqrt(2.0 * np.pi) / x * np.sum(np.exp(-(odd ** 2) * np.pi ** 2 / (8.0 * x * x))))
    signs = np.where(k % 2 == 1, 1.0, -1.0)
    return float(1.0 - 2.0 * np.sum(signs * np.exp(-2.0 * k ** 2 * x * x)))


def kolmogorov_quantile(alpha: float) -> float:
    """Upper alpha quantile of sup |B| for a single bridge, by bisection on the series"""
    if not 0.0 < alpha < 1.0:
        raise ValueError(f"alpha must lie in (0, 1), got {alpha}")
    target = 1.0 - alpha
    return float(optimize.bisect(lambda x: kolmogorov_cdf(x) - target, 1e-3, 10.0, xtol=1e-10))


def critval_table(dims: Iterable[int] = range(1, 6), alphas: Iterable[float] = (0.10, 0.05, 0.01),
                  config: CritvalConfig = None) -> pd.DataFrame:
    """Critical values for every (d, alpha) pair"""
    config = config or CritvalConfig()
    rows = []
    for d in dims:
        for alpha in alphas:
            rows.append({'d': d, 'alpha': alpha, 'critical_value': critical_value(d, alpha, config)})
    return pd.DataFrame(rows)
