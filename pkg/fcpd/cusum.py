"""
Projection based CUSUM statistics

    T^(d)  = max_k | Sigma^{-1/2} S_k(eta_hat) |      (projected scores)
           = max_k || C^(d) S_k(eta) ||               (truncated operator form)

S_k are the centered partial sums scaled by n^{-1/2}. The change-aligned
variant replaces the first eigenvector by

    v1' = (v1 / n^gamma + s u) / || v1 / n^gamma + s u ||,   s = sign<v1, u>

where u = S_{k_hat} / n^{1/2} is the maximal partial sum, and keeps every
eigenvalue estimate unchanged.
"""

import logging
import math
from dataclasses import dataclass, field, replace
from typing import Dict, Optional, Tuple

import numpy as np

from fcpd import critval
from fcpd.covariance import BandwidthRule, KernelSpec, covariance_for
from fcpd.errors import (DegenerateAlignmentError, DegenerateSpectrumError, DimensionError, NumericalError,
                         SampleSizeError)
from fcpd.hilbert import FunctionalSample
from fcpd.spectral import EigenSystem, check_spectrum, eig_sym, truncated_invsqrt

logger = logging.getLogger(__name__)

ESTIMATORS = ('cov0', 'bartlett')
DEFAULT_GAMMA = 0.4
ROUTE_TOLERANCE = 1e-10


@dataclass(frozen=True)
class CusumConfig:
    d: int = 1
    gamma: float = DEFAULT_GAMMA
    aligned: bool = False
    estimator: str = 'cov0'
    kernel: KernelSpec = field(default_factory=KernelSpec)
    bandwidth: BandwidthRule = field(default_factory=BandwidthRule)

    def __post_init__(self):
        if self.d < 1:
            raise DimensionError(f"Projection dimension must be >= 1, got {self.d}")
        if not 0.0 < self.gamma < 0.5:
            raise ValueError(f"gamma must lie in (0, 1/2), got {self.gamma}")
        if self.estimator not in ESTIMATORS:
            raise ValueError(f"Unknown estimator '{self.estimator}', expected one of {ESTIMATORS}")

    @property
    def variant(self) -> str:
        """Column label in rejection tables: v1, v1_aligned, v1B, v1B_aligned"""
        name = 'v1' if self.estimator == 'cov0' else 'v1B'
        return f"{name}_aligned" if self.aligned else name


@dataclass(frozen=True)
class CusumResult:
    """
    Outcome of one CUSUM computation

    ``degenerate`` marks the infinite sentinel: one of the leading d eigenvalues
    vanished. ``statistic`` then holds math.inf for ordering and is reported as
    the string "inf".
    """
    statistic: float
    trace: Optional[np.ndarray]
    k_hat: int
    d: int
    aligned: bool
    estimator: str
    degenerate: bool = False
    critical_value: Optional[float] = None
    alpha: Optional[float] = None
    reject: Optional[bool] = None

    def to_report(self, include_trace: bool = False) -> Dict:
        report = {
            'statistic': 'inf' if self.degenerate else float(self.statistic),
            'k_hat': int(self.k_hat),
            'd': int(self.d),
            'aligned': bool(self.aligned),
            'estimator': self.estimator,
            'critical_value': None if self.critical_value is None else float(self.critical_value),
            'alpha': self.alpha,
            'reject': self.reject,
        }
        if include_trace:
            report['trace'] = [] if self.trace is None else [float(v) for v in self.trace]
        return report


def partial_sums(sample: FunctionalSample) -> np.ndarray:
    """
    Centered partial sums S_k = sum_{i<=k} (eta_i - mean) / n^{1/2}

    Returns:
        n x p matrix, row k-1 holds S_k; the last row is zero up to rounding
    """
    if sample.n < 2:
        raise SampleSizeError(f"Partial sums need n >= 2, got {sample.n}")
    X = sample.coeffs
    return np.cumsum(X - X.mean(axis=0), axis=0) / np.sqrt(sample.n)


def argmax_partial_sum(sample: FunctionalSample) -> Tuple[int, np.ndarray]:
    """
    Location of the largest partial sum

    Returns:
        (k_hat, u_hat) with k_hat in 1..n-1 (smallest maximizer) and
        u_hat = S_{k_hat} / n^{1/2}
    """
    S = partial_sums(sample)
    norms = np.linalg.norm(S[:-1], axis=1)
    k_hat = int(np.argmax(norms)) + 1
    return k_hat, S[k_hat - 1] / np.sqrt(sample.n)


def projected_trace(S: np.ndarray, E: EigenSystem, d: int) -> np.ndarray:
    """|Sigma^{-1/2} S_k(eta_hat)| for k = 1..n-1 using scores on the leading d eigenvectors"""
    lam, V = E.leading(d)
    scores = S[:-1] @ V
    return np.sqrt(np.sum(scores ** 2 / np.abs(lam), axis=1))


def operator_trace(S: np.ndarray, E: EigenSystem, d: int) -> np.ndarray:
    """||C^(d) S_k|| for k = 1..n-1"""
    Cd = truncated_invsqrt(E, d)
    return np.linalg.norm(S[:-1] @ Cd, axis=1)


def _covariance_eigensystem(sample: FunctionalSample, config: CusumConfig) -> EigenSystem:
    sample.require(2)
    if config.d > sample.p:
        raise DimensionError(f"d={config.d} exceeds the basis dimension p={sample.p}")
    C = covariance_for(sample, config.estimator, config.kernel, config.bandwidth)
    return eig_sym(C)


def _sentinel(sample: FunctionalSample, config: CusumConfig, aligned: bool, err: DegenerateSpectrumError) -> CusumResult:
    logger.info(f"Degenerate spectrum, statistic set to inf ({err})")
    k_hat, _ = argmax_partial_sum(sample)
    return CusumResult(
        statistic=math.inf, trace=None, k_hat=k_hat, d=config.d,
        aligned=aligned, estimator=config.estimator, degenerate=True, reject=True,
    )


def _from_trace(trace: np.ndarray, config: CusumConfig, aligned: bool) -> CusumResult:
    k = int(np.argmax(trace))
    return CusumResult(
        statistic=float(trace[k]), trace=trace, k_hat=k + 1, d=config.d,
        aligned=aligned, estimator=config.estimator,
    )


def cusum_stat(sample: FunctionalSample, config: CusumConfig = None) -> CusumResult:
    """
    Standard (non aligned) projected CUSUM statistic

    Both the projected-score and the truncated-operator forms are computed and
    must agree to 1e-10 relative to the statistic, otherwise NumericalError.
    """
    config = config or CusumConfig()
    E = _covariance_eigensystem(sample, config)
    try:
        check_spectrum(E, config.d)
    except DegenerateSpectrumError as e:
        return _sentinel(sample, config, False, e)

    S = partial_sums(sample)
    trace = projected_trace(S, E, config.d)
    check = operator_trace(S, E, config.d)
    statistic = float(trace.max())
    gap = float(np.max(np.abs(trace - check)))
    if gap > ROUTE_TOLERANCE * (1.0 + statistic):
        raise NumericalError(f"Projected and operator CUSUM forms disagree by {gap:.3e}")
    return _from_trace(trace, config, False)


def align_first_component(v1, u_hat, gamma: float, n: int) -> np.ndarray:
    """
    Rotate the first eigenvector toward the maximal partial sum

    Args:
        v1: unit first eigenvector
        u_hat: S_{k_hat} / n^{1/2}
        gamma: exponent in (0, 1/2)
        n: sample size

    Returns:
        unit vector v1'; v1 itself when u_hat is exactly zero
    """
    v1 = np.asarray(v1, dtype=float)
    u_hat = np.asarray(u_hat, dtype=float)
    if v1.shape != u_hat.shape:
        raise DimensionError(f"Length mismatch: {v1.shape} vs {u_hat.shape}")
    if abs(np.linalg.norm(v1) - 1.0) > 1e-10:
        raise ValueError("v1 must have unit norm")
    if not np.any(u_hat):
        return v1.copy()

    s = 1.0 if v1 @ u_hat >= 0 else -1.0
    w = v1 / n ** gamma + s * u_hat
    norm = np.linalg.norm(w)
    if norm == 0.0:
        raise DegenerateAlignmentError("v1 / n^gamma + s * u_hat vanished")
    return w / norm


def aligned_components(sample: FunctionalSample, E: EigenSystem, d: int, gamma: float) -> np.ndarray:
    """Leading d eigenvectors with the first one replaced by its aligned version"""
    _, V = E.leading(d)
    _, u_hat = argmax_partial_sum(sample)
    V = V.copy()
    V[:, 0] = align_first_component(V[:, 0], u_hat, gamma, sample.n)
    return V


def cusum_stat_aligned(sample: FunctionalSample, config: CusumConfig = None) -> CusumResult:
    """
    CUSUM statistic on the change-aligned components

    Only the projected form exists here since the aligned components no longer
    diagonalize the covariance estimate.
    """
    config = config or CusumConfig(aligned=True)
    E = _covariance_eigensystem(sample, config)
    try:
        check_spectrum(E, config.d)
    except DegenerateSpectrumError as e:
        return _sentinel(sample, config, True, e)

    V = aligned_components(sample, E, config.d, config.gamma)
    lam = E.values[:config.d]
    S = partial_sums(sample)
    scores = S[:-1] @ V
    trace = np.sqrt(np.sum(scores ** 2 / np.abs(lam), axis=1))
    return _from_trace(trace, config, True)


def run_cusum(sample: FunctionalSample, config: CusumConfig = None) -> CusumResult:
    config = config or CusumConfig()
    if config.aligned:
        return cusum_stat_aligned(sample, config)
    return cusum_stat(sample, config)


def decide(result: CusumResult, alpha: float = 0.10, critval_config=None,
           critical_value: Optional[float] = None) -> CusumResult:
    """
    Attach the critical value and the reject flag

    Args:
        result: computed statistic
        alpha: level in (0, 1)
        critval_config: Monte Carlo settings, defaults used when None
        critical_value: precomputed quantile, skips the lookup

    Returns:
        copy of result with critical_value, alpha and reject set
    """
    if not 0.0 < alpha < 1.0:
        raise ValueError(f"alpha must lie in (0, 1), got {alpha}")
    if critical_value is None:
        critical_value = critval.critical_value(result.d, alpha, critval_config)
    reject = True if result.degenerate else bool(result.statistic > critical_value)
    return replace(result, critical_value=float(critical_value), alpha=alpha, reject=reject)
