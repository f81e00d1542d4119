"""
Symmetric eigendecomposition and truncated inverse square roots

The eigensolver is a cyclic Jacobi method. Each sweep visits all index pairs
in round-robin order: the pairs of one round are disjoint, so their rotations
are assembled into a single orthogonal matrix and applied together.
"""

import logging
from dataclasses import dataclass
from typing import List, Optional, Tuple

import numpy as np

from fcpd.errors import DegenerateSpectrumError, DimensionError, ShapeError
from fcpd.hilbert import hs_norm, symmetrize

logger = logging.getLogger(__name__)

SYMMETRY_TOLERANCE = 1e-10
OFF_DIAGONAL_TOLERANCE = 1e-13
MAX_SWEEPS = 100


@dataclass(frozen=True)
class EigenSystem:
    """Eigenvalues sorted descending by signed value, eigenvectors as columns"""
    values: np.ndarray
    vectors: np.ndarray

    @property
    def p(self) -> int:
        return self.values.shape[0]

    def leading(self, d: int) -> Tuple[np.ndarray, np.ndarray]:
        _check_d(d, self.p)
        return self.values[:d], self.vectors[:, :d]

    def component(self, j: int) -> np.ndarray:
        """j-th eigenvector, 1-based as in v_1, v_2, ..."""
        _check_d(j, self.p)
        return self.vectors[:, j - 1]


def _check_d(d: int, p: int):
    if not 1 <= d <= p:
        raise DimensionError(f"Dimension d={d} must satisfy 1 <= d <= p={p}")


def _round_robin_rounds(p: int) -> List[List[Tuple[int, int]]]:
    """
    Pairings of 0..p-1 such that every pair appears exactly once per sweep

    Odd sizes are padded with a dummy index whose pairs are dropped.
    """
    m = p + (p % 2)
    order = list(range(m))
    rounds = []
    for _ in range(m - 1):
        pairs = []
        for i in range(m // 2):
            a, b = order[i], order[m - 1 - i]
            if a < p and b < p:
                pairs.append((min(a, b), max(a, b)))
        rounds.append(pairs)
        # keep the first index fixed and rotate the rest
        order = [order[0], order[-1]] + order[1:-1]
    return rounds


def _rotation(app: float, aqq: float, apq: float) -> Tuple[float, float]:
    theta = (aqq - app) / (2.0 * apq)
    if abs(theta) > 1e150:
        t = 0.5 / theta
    else:
        sign = 1.0 if theta >= 0 else -1.0
        t = sign / (abs(theta) + np.sqrt(theta * theta + 1.0))
    c = 1.0 / np.sqrt(t * t + 1.0)
    return c, t * c


def _off_norm(A: np.ndarray) -> float:
    return float(np.sqrt(max(np.sum(A * A) - np.sum(np.diag(A) ** 2), 0.0)))


def eig_sym(A) -> EigenSystem:
    """
    Eigendecomposition of a symmetric matrix by cyclic Jacobi rotations

    Args:
        A: p x p matrix, symmetric within 1e-10

    Returns:
        EigenSystem with values sorted descending (signed) and each eigenvector
        oriented so that its largest-magnitude entry is positive
    """
    A = np.array(A, dtype=float)
    if A.ndim != 2 or A.shape[0] != A.shape[1]:
        raise ShapeError(f"Expected a square matrix, got shape {A.shape}")
    scale = max(1.0, float(np.max(np.abs(A)))) if A.size else 1.0
    if np.max(np.abs(A - A.T), initial=0.0) > SYMMETRY_TOLERANCE * scale:
        raise ShapeError("Matrix is not symmetric")

    p = A.shape[0]
    A = symmetrize(A)
    V = np.eye(p)
    threshold = OFF_DIAGONAL_TOLERANCE * hs_norm(A)
    rounds = _round_robin_rounds(p)

    sweeps = 0
    while _off_norm(A) > threshold:
        if sweeps >= MAX_SWEEPS:
            logger.warning(f"Jacobi did not reach tolerance after {MAX_SWEEPS} sweeps (off={_off_norm(A):.3e})")
            break
        for pairs in rounds:
            J = np.eye(p)
            rotated = []
            for i, j in pairs:
                apq = A[i, j]
                if apq == 0.0:
                    continue
                c, s = _rotation(A[i, i], A[j, j], apq)
                J[i, i] = J[j, j] = c
                J[i, j] = s
                J[j, i] = -s
                rotated.append((i, j))
            if not rotated:
                continue
            A = J.T @ A @ J
            for i, j in rotated:
                A[i, j] = A[j, i] = 0.0
            V = V @ J
        sweeps += 1

    values = np.diag(A).copy()
    order = np.argsort(-values, kind='stable')
    values = values[order]
    V = V[:, order]

    for k in range(p):
        col = V[:, k]
        if col[int(np.argmax(np.abs(col)))] < 0:
            V[:, k] = -col

    logger.debug(f"Jacobi converged in {sweeps} sweeps (p={p})")
    return EigenSystem(values=values, vectors=V)


def degeneracy_eps(E: EigenSystem) -> float:
    """Numerical zero for eigenvalues: 1e-12 * max(1, |lambda_1|)"""
    return 1e-12 * max(1.0, abs(float(E.values[0])))


def check_spectrum(E: EigenSystem, d: int, eps: Optional[float] = None):
    """Raise DegenerateSpectrumError if one of the leading d |eigenvalues| is <= eps"""
    _check_d(d, E.p)
    eps = degeneracy_eps(E) if eps is None else eps
    for j in range(d):
        if abs(E.values[j]) <= eps:
            raise DegenerateSpectrumError(j + 1, float(E.values[j]), eps)


def truncated_invsqrt(E: EigenSystem, d: int, eps: Optional[float] = None) -> np.ndarray:
    """
    Truncated inverse square root sum_{j<=d} |lambda_j|^{-1/2} v_j v_j^T

    Raises:
        DegenerateSpectrumError: some |lambda_j| <= eps for j <= d
    """
    check_spectrum(E, d, eps)
    lam, V = E.leading(d)
    return symmetrize((V / np.sqrt(np.abs(lam))) @ V.T)


def projector(E: EigenSystem, d: int) -> np.ndarray:
    """Orthogonal projection onto the span of the leading d eigenvectors"""
    _, V = E.leading(d)
    return V @ V.T


def subspace_distance(E1: EigenSystem, E2: EigenSystem, d: int) -> float:
    """HS distance between the rank-d eigenprojections, in [0, sqrt(2d)]"""
    return hs_norm(projector(E1, d) - projector(E2, d))


def reconstruct(E: EigenSystem) -> np.ndarray:
    return (E.vectors * E.values) @ E.vectors.T


def explained_variance(E: EigenSystem, j: int) -> float:
    """Share of |lambda_j| in the total absolute spectrum"""
    _check_d(j, E.p)
    total = float(np.sum(np.abs(E.values)))
    if total == 0.0:
        return 0.0
    return abs(float(E.values[j - 1])) / total
