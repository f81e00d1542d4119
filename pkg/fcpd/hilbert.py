"""
Coefficient-space representation of L^2[0,1]

Curves are stored as coefficient vectors in an orthonormal basis, so every
Hilbert space operation reduces to Euclidean linear algebra:

    <x, y>_H      -> x @ y
    x (tensor) y  -> outer(x, y)          ((x (tensor) y) z = <y, z> x)
    ||A||_S       -> Frobenius norm

Grids only appear at the I/O boundary (project_curve / evaluate_curve).
Operators are plain p x p numpy arrays.
"""

import logging
from dataclasses import dataclass
from typing import Optional

import numpy as np

from fcpd.errors import DimensionError, SampleSizeError

logger = logging.getLogger(__name__)

BASIS_KINDS = ('fourier', 'raw-grid')

# Number of basis functions used throughout the simulation designs
DEFAULT_DIMENSION = 25


@dataclass(frozen=True)
class BasisDescriptor:
    """
    Orthonormal basis on [0, 1]

    fourier:  [1, sqrt(2) sin(2 pi k t), sqrt(2) cos(2 pi k t)] for k = 1, 2, ...
              interleaved and truncated to ``dimension`` functions.
    raw-grid: ``dimension`` equispaced grid values scaled by the square root of
              their trapezoid weights, so dot products approximate L^2 inner
              products.
    """
    kind: str = 'fourier'
    dimension: int = DEFAULT_DIMENSION

    def __post_init__(self):
        if self.kind not in BASIS_KINDS:
            raise ValueError(f"Unknown basis kind '{self.kind}', expected one of {BASIS_KINDS}")
        if self.dimension < 1:
            raise DimensionError(f"Basis dimension must be >= 1, got {self.dimension}")
        if self.kind == 'raw-grid' and self.dimension < 2:
            raise DimensionError("A raw grid needs at least 2 points")

    def native_grid(self) -> np.ndarray:
        """Grid on which a raw-grid basis is defined"""
        return np.linspace(0.0, 1.0, self.dimension)


FOURIER_25 = BasisDescriptor('fourier', DEFAULT_DIMENSION)


@dataclass
class FunctionalSample:
    """n observations stored as rows of basis coefficients"""
    coeffs: np.ndarray
    basis: BasisDescriptor = FOURIER_25

    def __post_init__(self):
        self.coeffs = np.atleast_2d(np.asarray(self.coeffs, dtype=float))
        if self.coeffs.ndim != 2:
            raise DimensionError(f"Coefficients must be an n x p matrix, got shape {self.coeffs.shape}")
        if self.coeffs.shape[1] != self.basis.dimension:
            raise DimensionError(
                f"Sample has {self.coeffs.shape[1]} columns but the basis has dimension {self.basis.dimension}"
            )
        if not np.all(np.isfinite(self.coeffs)):
            raise ValueError("Sample contains non-finite coefficients")

    @property
    def n(self) -> int:
        return self.coeffs.shape[0]

    @property
    def p(self) -> int:
        return self.coeffs.shape[1]

    def with_coeffs(self, coeffs: np.ndarray) -> 'FunctionalSample':
        return FunctionalSample(coeffs, self.basis)

    def require(self, min_n: int = 2):
        if self.n < min_n:
            raise SampleSizeError(f"Need at least {min_n} observations, got {self.n}")


def _check_same_length(x: np.ndarray, y: np.ndarray):
    if x.shape != y.shape:
        raise DimensionError(f"Length mismatch: {x.shape} vs {y.shape}")


def inner_product(x, y) -> float:
    """<x, y> of two coefficient vectors"""
    x = np.asarray(x, dtype=float)
    y = np.asarray(y, dtype=float)
    _check_same_length(x, y)
    return float(x @ y)


def norm(x) -> float:
    x = np.asarray(x, dtype=float)
    return float(np.sqrt(x @ x))


def tensor(x, y) -> np.ndarray:
    """
    Rank one operator x (tensor) y

    Args:
        x: coefficient vector
        y: coefficient vector of the same length

    Returns:
        p x p matrix A with A @ z == <y, z> * x
    """
    x = np.asarray(x, dtype=float)
    y = np.asarray(y, dtype=float)
    _check_same_length(x, y)
    return np.outer(x, y)


def hs_norm(A) -> float:
    """Hilbert-Schmidt norm, i.e. the Frobenius norm of the coefficient matrix"""
    return float(np.linalg.norm(np.asarray(A, dtype=float), 'fro'))


def symmetrize(A: np.ndarray) -> np.ndarray:
    return 0.5 * (A + A.T)


def trapezoid_weights(grid) -> np.ndarray:
    """Weights w such that w @ f(grid) is the composite trapezoid rule"""
    grid = np.asarray(grid, dtype=float)
    if grid.size < 2:
        raise DimensionError("Quadrature needs at least 2 grid points")
    gaps = np.diff(grid)
    weights = np.zeros_like(grid)
    weights[:-1] += gaps / 2.0
    weights[1:] += gaps / 2.0
    return weights


def _check_grid(grid: np.ndarray):
    if grid.ndim != 1:
        raise DimensionError("Grid must be one dimensional")
    if np.any(np.diff(grid) <= 0):
        raise DimensionError("Grid must be strictly increasing")
    if grid[0] < 0.0 or grid[-1] > 1.0:
        raise DimensionError("Grid must lie in [0, 1]")


def basis_matrix(basis: BasisDescriptor, grid) -> np.ndarray:
    """
    Evaluate the basis functions on a grid

    Returns:
        p x m matrix, row j holds the j-th basis function on the grid
    """
    grid = np.asarray(grid, dtype=float)
    _check_grid(grid)
    p = basis.dimension

    if basis.kind == 'raw-grid':
        native = basis.native_grid()
        if grid.shape != native.shape or not np.allclose(grid, native, atol=1e-12):
            raise DimensionError(f"A raw-grid basis can only be evaluated on its own {p}-point grid")
        return np.diag(1.0 / np.sqrt(trapezoid_weights(native)))

    rows = np.empty((p, grid.size))
    rows[0] = 1.0
    for j in range(1, p):
        k = (j + 1) // 2
        if j % 2 == 1:
            rows[j] = np.sqrt(2.0) * np.sin(2.0 * np.pi * k * grid)
        else:
            rows[j] = np.sqrt(2.0) * np.cos(2.0 * np.pi * k * grid)
    return rows


def gram_matrix(basis: BasisDescriptor, grid) -> np.ndarray:
    """Trapezoid Gram matrix of the basis on ``grid`` (identity up to quadrature error)"""
    B = basis_matrix(basis, grid)
    return (B * trapezoid_weights(grid)) @ B.T


def project_curve(values, grid, basis: BasisDescriptor = FOURIER_25) -> np.ndarray:
    """
    Project grid-sampled curves onto the basis by trapezoid quadrature

    Args:
        values: curve values on the grid, shape (m,) or (n, m) for n curves
        grid: strictly increasing points in [0, 1]
        basis: target basis

    Returns:
        coefficient vector (p,) or coefficient matrix (n, p)
    """
    grid = np.asarray(grid, dtype=float)
    values = np.asarray(values, dtype=float)
    if grid.size < basis.dimension:
        raise DimensionError(
            f"Need at least {basis.dimension} grid points to project onto {basis.dimension} basis functions, got {grid.size}"
        )
    if values.shape[-1] != grid.size:
        raise DimensionError(f"Curve has {values.shape[-1]} values but the grid has {grid.size} points")
    B = basis_matrix(basis, grid)
    return values @ (B * trapezoid_weights(grid)).T


def evaluate_curve(coeffs, grid, basis: BasisDescriptor = FOURIER_25) -> np.ndarray:
    """Inverse of project_curve: evaluate coefficient vectors (or rows) on a grid"""
    coeffs = np.asarray(coeffs, dtype=float)
    if coeffs.shape[-1] != basis.dimension:
        raise DimensionError(f"Expected {basis.dimension} coefficients, got {coeffs.shape[-1]}")
    return coeffs @ basis_matrix(basis, grid)


def unit_grid(size: Optional[int] = None) -> np.ndarray:
    """Uniform grid on [0, 1] including both endpoints (default 1001 points)"""
    return np.linspace(0.0, 1.0, 1001 if size is None else size)
