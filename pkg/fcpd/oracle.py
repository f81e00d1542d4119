"""
Theory quantities for a trend g on [0, 1]

    G(g)     = int g^2 - (int g)^2
    calG(x)  = int_0^x g - x int_0^1 g
    S        = sup_x (sum_l calG_l(x)^2)^{1/2}
    beta_i   = g(i/n) - int g
    s_n      = G(g) sum_{|r|<=n} K(r/h),   kappa = G(g) int K

Integrals use the composite trapezoid rule on a uniform grid refined at the
trend breakpoints. Each breakpoint is entered twice, with the left and the
right limit, so jumps are integrated exactly.
"""

import logging
from dataclasses import dataclass, field
from typing import Callable, Tuple

import numpy as np
from scipy import integrate

from fcpd.covariance import KernelSpec
from fcpd.datagen import TrendFunction, TrendSpec
from fcpd.errors import UnsupportedTrendError

logger = logging.getLogger(__name__)

INTEGRATION_GRID_SIZE = 10001


@dataclass(frozen=True)
class TrendHandle:
    """Evaluator for a trend on [0, 1] together with its breakpoints"""
    func: Callable
    breakpoints: Tuple[float, ...] = ()
    grid_size: int = INTEGRATION_GRID_SIZE

    def __call__(self, x):
        return np.asarray(self.func(np.asarray(x, dtype=float)), dtype=float)

    @classmethod
    def from_trend(cls, g: TrendFunction, grid_size: int = INTEGRATION_GRID_SIZE) -> 'TrendHandle':
        return cls(g, g.breakpoints(), grid_size)

    @classmethod
    def from_table(cls, x, y, grid_size: int = INTEGRATION_GRID_SIZE) -> 'TrendHandle':
        """Piecewise linear interpolation of tabulated values, constant beyond the table"""
        x = np.asarray(x, dtype=float)
        y = np.asarray(y, dtype=float)
        if x.shape != y.shape or x.ndim != 1 or x.size < 2:
            raise ValueError("A trend table needs matching x and y arrays with at least 2 points")
        if np.any(np.diff(x) <= 0):
            raise ValueError("Trend table x values must be strictly increasing")
        knots = tuple(float(t) for t in x if 0.0 < t < 1.0)
        return cls(lambda t: np.interp(t, x, y), knots, grid_size)

    @classmethod
    def constant(cls, c: float, grid_size: int = INTEGRATION_GRID_SIZE) -> 'TrendHandle':
        return cls(lambda t: np.full_like(t, c, dtype=float), (), grid_size)


def _nodes(g: TrendHandle, extra: Tuple[float, ...] = ()) -> Tuple[np.ndarray, np.ndarray]:
    """Integration nodes with doubled breakpoints and the trend values there"""
    breaks = sorted({b for b in tuple(g.breakpoints) + tuple(extra) if 0.0 < b < 1.0})
    base = np.linspace(0.0, 1.0, g.grid_size)
    base = base[~np.isin(base, breaks)]
    left = np.array([np.nextafter(b, -np.inf) for b in breaks])
    right = np.array([np.nextafter(b, np.inf) for b in breaks])

    xs = np.concatenate([base, breaks, breaks])
    ys = np.concatenate([g(base), g(left), g(right)]) if breaks else g(base)
    # stable sort keeps the left limit ahead of the right limit at each breakpoint
    order = np.argsort(xs, kind='stable')
    return xs[order], ys[order]


def _integral(g: TrendHandle, power: int = 1) -> float:
    x, y = _nodes(g)
    return float(integrate.trapezoid(y ** power, x))


def trend_variance(g: TrendHandle) -> float:
    """G(g) = int g^2 - (int g)^2"""
    return max(0.0, _integral(g, 2) - _integral(g, 1) ** 2)


def trend_variance_quad(g: TrendHandle) -> float:
    """G(g) by adaptive quadrature, an independent check of trend_variance"""
    points = list(g.breakpoints) or None
    m1, _ = integrate.quad(lambda t: float(g(t)), 0.0, 1.0, points=points, limit=200, epsabs=1e-13)
    m2, _ = integrate.quad(lambda t: float(g(t)) ** 2, 0.0, 1.0, points=points, limit=200, epsabs=1e-13)
    return max(0.0, m2 - m1 ** 2)


def bridge_drift(g: TrendHandle, x):
    """
    calG(x) = int_0^x g - x int_0^1 g

    Args:
        g: trend handle
        x: scalar or array in [0, 1]
    """
    xs, ys = _nodes(g)
    cumulative = integrate.cumulative_trapezoid(ys, xs, initial=0.0)
    x_arr = np.asarray(x, dtype=float)
    if np.any((x_arr < 0.0) | (x_arr > 1.0)):
        raise ValueError("x must lie in [0, 1]")
    values = np.interp(x_arr, xs, cumulative) - x_arr * cumulative[-1]
    return float(values) if values.ndim == 0 else values


def drift_extremum(trend: TrendSpec, grid_size: int = INTEGRATION_GRID_SIZE) -> Tuple[float, float]:
    """
    (sup, argsup) over x of (sum_l calG_{g_l}(x)^2)^{1/2}

    The grid is refined at every breakpoint; an empty trend gives (0, 0).
    """
    if trend.count == 0:
        return 0.0, 0.0
    handles = [TrendHandle.from_trend(c.g, grid_size) for c in trend.components]
    breaks = tuple(b for h in handles for b in h.breakpoints)
    x = np.unique(np.concatenate([np.linspace(0.0, 1.0, grid_size), breaks]))
    total = np.zeros_like(x)
    for h in handles:
        total += bridge_drift(h, x) ** 2
    k = int(np.argmax(total))
    return float(np.sqrt(total[k])), float(x[k])


def drift_sup(trend: TrendSpec, grid_size: int = INTEGRATION_GRID_SIZE) -> float:
    return drift_extremum(trend, grid_size)[0]


def drift_argsup(trend: TrendSpec, grid_size: int = INTEGRATION_GRID_SIZE) -> float:
    """Location of the supremum in drift_sup (smallest x on ties)"""
    return drift_extremum(trend, grid_size)[1]


def beta_coeffs(g: TrendHandle, n: int) -> np.ndarray:
    """beta_{n,i} = g(i/n) - int g for i = 1..n"""
    if n < 1:
        raise ValueError(f"n must be >= 1, got {n}")
    return g(np.arange(1, n + 1) / n) - _integral(g, 1)


def beta_autocovariance(g: TrendHandle, n: int, max_lag: int) -> np.ndarray:
    """sum_i beta_i beta_{i+r} / n for r = 0..max_lag"""
    beta = beta_coeffs(g, n)
    return np.array([beta[:n - r] @ beta[r:] / n for r in range(max_lag + 1)])


@dataclass(frozen=True, eq=False)
class AltCovarianceLimit:
    s_n: float
    target: np.ndarray = field(repr=False)
    kappa: float
    trend_variance: float


def alt_covariance_limit(trend: TrendSpec, kernel: KernelSpec, n: int, h: float) -> AltCovarianceLimit:
    """
    Scale and limit of the long-run estimator under a single-direction change

    C_B / s_n approaches delta (tensor) delta, with s_n = G(g) sum_{|r|<=n} K(r/h).

    Raises:
        UnsupportedTrendError: the trend does not have exactly one direction
    """
    if trend.count != 1:
        raise UnsupportedTrendError(f"Defined for a single change direction, got {trend.count}")
    component = trend.components[0]
    G = trend_variance(TrendHandle.from_trend(component.g))
    s_n = G * kernel.weight_sum(n, h)
    return AltCovarianceLimit(
        s_n=s_n,
        target=np.outer(component.delta, component.delta),
        kappa=G * kernel.integral(),
        trend_variance=G,
    )
