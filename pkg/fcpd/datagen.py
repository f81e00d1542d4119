"""
Simulation designs: Brownian motion noise in a 25-function Fourier basis,
trend injection along one or several orthonormal directions, scenarios A-F
and a functional AR(1) noise generator.
"""

import logging
from dataclasses import dataclass, field
from functools import lru_cache
from typing import Optional, Sequence, Tuple

import numpy as np
from scipy import signal

from fcpd.errors import DimensionError, SampleSizeError, StabilityError, TrendError
from fcpd.hilbert import FOURIER_25, BasisDescriptor, FunctionalSample, basis_matrix, project_curve, trapezoid_weights
from fcpd.spectral import eig_sym

logger = logging.getLogger(__name__)

SCENARIOS = ('A', 'B', 'C', 'D', 'E', 'F')
TREND_KINDS = ('ramp', 'epidemic')

PATH_GRID_SIZE = 1001
COVARIANCE_GRID_SIZE = 2001
BURN_IN = 100
# rows generated per chunk when simulating paths on the grid
PATH_CHUNK = 2000


@dataclass(frozen=True)
class TrendFunction:
    """
    scale * g(x) with

    ramp:     g(x) = (x - theta1) / (theta2 - theta1) 1{theta1 < x <= theta2} + 1{theta2 < x}
              (theta1 == theta2 is the step 1{x > theta2})
    epidemic: g(x) = 1{theta1 < x <= theta2}
    """
    theta1: float
    theta2: float
    scale: float = 1.0
    kind: str = 'ramp'

    def __post_init__(self):
        if self.kind not in TREND_KINDS:
            raise TrendError(f"Unknown trend kind '{self.kind}', expected one of {TREND_KINDS}")
        if not 0.0 < self.theta1 <= self.theta2 <= 1.0:
            raise TrendError(f"Need 0 < theta1 <= theta2 <= 1, got ({self.theta1}, {self.theta2})")
        if self.kind == 'epidemic' and self.theta1 == self.theta2:
            raise TrendError("An epidemic window needs theta1 < theta2")

    def __call__(self, x):
        x = np.asarray(x, dtype=float)
        if self.kind == 'epidemic':
            g = ((x > self.theta1) & (x <= self.theta2)).astype(float)
        elif self.theta1 == self.theta2:
            g = (x > self.theta2).astype(float)
        else:
            ramp = (x - self.theta1) / (self.theta2 - self.theta1)
            g = np.where(x <= self.theta1, 0.0, np.where(x <= self.theta2, ramp, 1.0))
        g = self.scale * g
        return float(g) if g.ndim == 0 else g

    def breakpoints(self) -> Tuple[float, ...]:
        return tuple(sorted({t for t in (self.theta1, self.theta2) if 0.0 < t < 1.0}))


@dataclass(frozen=True, eq=False)
class TrendComponent:
    g: TrendFunction
    delta: np.ndarray


@dataclass(frozen=True, eq=False)
class TrendSpec:
    """Mean m_i = sum_l g_l(i/n) delta_l with orthonormal directions delta_l"""
    components: Tuple[TrendComponent, ...] = field(default_factory=tuple)

    def __post_init__(self):
        object.__setattr__(self, 'components', tuple(self.components))
        deltas = [np.asarray(c.delta, dtype=float) for c in self.components]
        if deltas and len({d.shape for d in deltas}) != 1:
            raise DimensionError("All change directions must have the same dimension")
        for i, d in enumerate(deltas):
            if abs(np.linalg.norm(d) - 1.0) > 1e-10:
                raise TrendError(f"Direction {i + 1} is not normalized (norm {np.linalg.norm(d):.12f})")
            for j in range(i):
                if abs(d @ deltas[j]) > 1e-8:
                    raise TrendError(f"Directions {j + 1} and {i + 1} are not orthogonal")

    @property
    def count(self) -> int:
        return len(self.components)

    def mean(self, n: int, p: int) -> np.ndarray:
        """n x p matrix of model means m_1, ..., m_n"""
        x = np.arange(1, n + 1) / n
        M = np.zeros((n, p))
        for c in self.components:
            if c.delta.shape[0] != p:
                raise DimensionError(f"Direction has dimension {c.delta.shape[0]}, sample has {p}")
            M += np.outer(c.g(x), c.delta)
        return M


def trend_value(theta1: float, theta2: float, x: float) -> float:
    """g_[theta1, theta2](x) for x in [0, 1]"""
    if not 0.0 <= x <= 1.0:
        raise TrendError(f"x must lie in [0, 1], got {x}")
    return TrendFunction(theta1, theta2)(x)


def inject_change(sample: FunctionalSample, trend: TrendSpec) -> FunctionalSample:
    """Add the model mean to every row; the noise is left untouched"""
    if trend.count == 0:
        return sample.with_coeffs(sample.coeffs.copy())
    return sample.with_coeffs(sample.coeffs + trend.mean(sample.n, sample.p))


def brownian_curves(n: int, grid_size: int = PATH_GRID_SIZE,
                    rng: Optional[np.random.Generator] = None) -> Tuple[np.ndarray, np.ndarray]:
    """
    Standard Brownian motion sampled on a uniform grid of [0, 1]

    Returns:
        (grid, values) with values of shape (n, grid_size); every path starts at 0
    """
    if grid_size < 100:
        raise DimensionError(f"grid_size must be >= 100, got {grid_size}")
    rng = rng if rng is not None else np.random.default_rng()
    grid = np.linspace(0.0, 1.0, grid_size)
    steps = rng.standard_normal((n, grid_size - 1)) * np.sqrt(1.0 / (grid_size - 1))
    values = np.zeros((n, grid_size))
    values[:, 1:] = np.cumsum(steps, axis=1)
    return grid, values


def brownian_paths(n: int, grid_size: int = PATH_GRID_SIZE, seed: Optional[int] = None,
                   rng: Optional[np.random.Generator] = None,
                   basis: BasisDescriptor = FOURIER_25) -> FunctionalSample:
    """Brownian motion paths projected onto the basis, generated in chunks"""
    rng = rng if rng is not None else np.random.default_rng(seed)
    chunks = []
    for start in range(0, n, PATH_CHUNK):
        grid, values = brownian_curves(min(PATH_CHUNK, n - start), grid_size, rng)
        chunks.append(project_curve(values, grid, basis))
    coeffs = np.vstack(chunks) if chunks else np.zeros((0, basis.dimension))
    return FunctionalSample(coeffs, basis)


@lru_cache(maxsize=8)
def _population_covariance(basis: BasisDescriptor, quad_size: int) -> np.ndarray:
    grid = np.linspace(0.0, 1.0, quad_size)
    Bw = basis_matrix(basis, grid) * trapezoid_weights(grid)
    kernel = np.minimum.outer(grid, grid)
    C = Bw @ kernel @ Bw.T
    return 0.5 * (C + C.T)


def population_covariance(basis: BasisDescriptor = FOURIER_25, quad_size: int = COVARIANCE_GRID_SIZE) -> np.ndarray:
    """Basis representation of the Brownian motion covariance kernel min(s, t)"""
    return _population_covariance(basis, quad_size).copy()


@lru_cache(maxsize=8)
def _population_eigensystem(basis: BasisDescriptor):
    return eig_sym(_population_covariance(basis, COVARIANCE_GRID_SIZE))


def bm_kl_component(j: int, basis: BasisDescriptor = FOURIER_25) -> Tuple[float, np.ndarray]:
    """
    j-th Karhunen-Loeve pair of Brownian motion in the basis

    The eigenvalue is ((j - 1/2) pi)^{-2}. The vector is the j-th eigenvector of
    the basis covariance, signed to match sqrt(2) sin((j - 1/2) pi t); unlike the
    raw projections of the sine functions these are exactly orthonormal.
    """
    if not 1 <= j <= basis.dimension:
        raise DimensionError(f"Component index must satisfy 1 <= j <= {basis.dimension}, got {j}")
    freq = (j - 0.5) * np.pi
    v = _population_eigensystem(basis).vectors[:, j - 1].copy()
    grid = np.linspace(0.0, 1.0, COVARIANCE_GRID_SIZE)
    reference = project_curve(np.sqrt(2.0) * np.sin(freq * grid), grid, basis)
    if v @ reference < 0:
        v = -v
    return 1.0 / freq ** 2, v


def curve_direction(func, basis: BasisDescriptor = FOURIER_25) -> np.ndarray:
    """Project a curve given as a callable on [0, 1] and normalize it"""
    grid = np.linspace(0.0, 1.0, COVARIANCE_GRID_SIZE)
    v = project_curve(func(grid), grid, basis)
    return v / np.linalg.norm(v)


def scenario_trend(scenario_id: str, basis: BasisDescriptor = FOURIER_25) -> TrendSpec:
    """Trend of scenarios A-F (A is the null hypothesis)"""
    scenario_id = scenario_id.upper()
    if scenario_id not in SCENARIOS:
        raise ValueError(f"Unknown scenario '{scenario_id}', expected one of {SCENARIOS}")

    if scenario_id == 'A':
        return TrendSpec(())
    if scenario_id == 'B':
        return TrendSpec((TrendComponent(TrendFunction(0.5, 0.5, 1 / 3), curve_direction(np.sin, basis)),))
    if scenario_id == 'C':
        return TrendSpec((TrendComponent(TrendFunction(0.5, 0.5, 1 / 2), bm_kl_component(10, basis)[1]),))
    if scenario_id == 'D':
        return TrendSpec((TrendComponent(TrendFunction(1 / 3, 2 / 3, 1 / 4), curve_direction(lambda t: t, basis)),))
    if scenario_id == 'E':
        return TrendSpec((TrendComponent(TrendFunction(1 / 3, 2 / 3, 1 / 3), curve_direction(np.cos, basis)),))

    scale = 8 ** -0.5
    return TrendSpec((
        TrendComponent(TrendFunction(3 / 5, 1.0, scale), bm_kl_component(10, basis)[1]),
        TrendComponent(TrendFunction(1 / 3, 2 / 3, scale), bm_kl_component(15, basis)[1]),
    ))


def far1(n: int, psi_norm: float, seed: Optional[int] = None,
         rng: Optional[np.random.Generator] = None, basis: BasisDescriptor = FOURIER_25) -> FunctionalSample:
    """
    Functional AR(1) eps_i = psi_norm * eps_{i-1} + xi_i with Brownian innovations

    The operator is psi_norm times the identity; the first 100 values are discarded.
    """
    if not 0.0 <= psi_norm < 1.0:
        raise StabilityError(f"psi_norm must lie in [0, 1), got {psi_norm}")
    rng = rng if rng is not None else np.random.default_rng(seed)
    xi = brownian_paths(n + BURN_IN, rng=rng, basis=basis).coeffs
    eps = signal.lfilter([1.0], [1.0, -psi_norm], xi, axis=0)
    return FunctionalSample(eps[BURN_IN:], basis)


def scenario(scenario_id: str, n: int, seed: Optional[int] = None, psi_norm: Optional[float] = None,
             rng: Optional[np.random.Generator] = None, basis: BasisDescriptor = FOURIER_25) -> FunctionalSample:
    """
    Sample of size n from scenario A-F

    Args:
        scenario_id: 'A' (no change) to 'F' (two change directions)
        n: sample size, at least 10
        seed: seed for the noise generator
        psi_norm: use FAR(1) noise with this operator norm instead of iid noise
    """
    if n < 10:
        raise SampleSizeError(f"Scenarios need n >= 10, got {n}")
    trend = scenario_trend(scenario_id, basis)
    rng = rng if rng is not None else np.random.default_rng(seed)
    if psi_norm is None:
        noise = brownian_paths(n, rng=rng, basis=basis)
    else:
        noise = far1(n, psi_norm, rng=rng, basis=basis)
    return inject_change(noise, trend)


def alignment_demo_trend(basis: BasisDescriptor = FOURIER_25) -> TrendSpec:
    """Change along (v10 + v11 + v12) / sqrt(3) with a step of height 1/3 at 1/2"""
    delta = sum(bm_kl_component(j, basis)[1] for j in (10, 11, 12)) / np.sqrt(3.0)
    return TrendSpec((TrendComponent(TrendFunction(0.5, 0.5, 1 / 3), delta),))


def alignment_demo(n: int = 200, seed: Optional[int] = None,
                   basis: BasisDescriptor = FOURIER_25) -> Tuple[FunctionalSample, TrendSpec]:
    trend = alignment_demo_trend(basis)
    noise = brownian_paths(n, seed=seed, basis=basis)
    return inject_change(noise, trend), trend


def known_directions(scenario_id: str, basis: BasisDescriptor = FOURIER_25) -> Sequence[np.ndarray]:
    return [c.delta for c in scenario_trend(scenario_id, basis).components]
