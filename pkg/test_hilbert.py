"""Tests for the coefficient-space Hilbert operations"""

import numpy as np
import pytest
from numpy.testing import assert_allclose

from fcpd.errors import DimensionError
from fcpd.hilbert import (FOURIER_25, BasisDescriptor, FunctionalSample, basis_matrix, evaluate_curve,
                          gram_matrix, hs_norm, inner_product, norm, project_curve, tensor,
                          trapezoid_weights, unit_grid)


def test_inner_product_examples():
    assert inner_product([1, 0], [1, 0]) == 1.0
    assert inner_product([1, 2], [3, -1]) == 1.0


def test_inner_product_length_mismatch():
    with pytest.raises(DimensionError):
        inner_product([1, 2, 3], [1, 2])


def test_inner_product_matches_loop(rng):
    for _ in range(100):
        x = rng.standard_normal(12)
        y = rng.standard_normal(12)
        expected = 0.0
        for a, b in zip(x, y):
            expected += a * b
        assert inner_product(x, y) == pytest.approx(expected, abs=1e-12)
        assert inner_product(x, x) >= 0.0
        assert inner_product(x, x) == pytest.approx(norm(x) ** 2)


def test_tensor_acts_as_rank_one_operator(rng):
    e1 = np.array([1.0, 0.0, 0.0])
    expected = np.zeros((3, 3))
    expected[0, 0] = 1.0
    assert_allclose(tensor(e1, e1), expected)

    x, y, z = rng.standard_normal((3, 6))
    assert_allclose(tensor(x, y) @ z, (y @ z) * x, atol=1e-12)
    assert np.min(np.linalg.eigvalsh(tensor(x, x))) >= -1e-12


def test_tensor_adjointness(rng):
    for _ in range(100):
        x, y, z, w = rng.standard_normal((4, 10))
        lhs = inner_product(tensor(x, y) @ z, w)
        assert lhs == pytest.approx(inner_product(y, z) * inner_product(x, w), rel=1e-10, abs=1e-12)
        assert lhs == pytest.approx(inner_product(z, tensor(y, x) @ w), rel=1e-10, abs=1e-12)


def test_hs_norm_examples(rng):
    assert hs_norm(np.zeros((3, 3))) == 0.0
    assert hs_norm(np.eye(4)) == pytest.approx(2.0)
    x, y = rng.standard_normal((2, 8))
    assert hs_norm(tensor(x, y)) == pytest.approx(norm(x) * norm(y), rel=1e-12)


def test_hs_norm_bounds_operator_action(rng):
    A = rng.standard_normal((7, 7))
    for _ in range(20):
        z = rng.standard_normal(7)
        assert norm(A @ z) <= hs_norm(A) * norm(z) + 1e-12


def test_trapezoid_weights_sum_to_one():
    assert trapezoid_weights(unit_grid()).sum() == pytest.approx(1.0)


def test_fourier_gram_is_identity():
    grid = np.linspace(0.0, 1.0, 1000)
    assert_allclose(gram_matrix(FOURIER_25, grid), np.eye(25), atol=1e-10)


def test_fourier_basis_layout():
    grid = np.array([0.0, 0.125, 0.25])
    B = basis_matrix(BasisDescriptor('fourier', 3), grid)
    assert_allclose(B[0], 1.0)
    assert_allclose(B[1], np.sqrt(2.0) * np.sin(2 * np.pi * grid))
    assert_allclose(B[2], np.sqrt(2.0) * np.cos(2 * np.pi * grid))


def test_project_constant_curve():
    grid = np.linspace(0.0, 1.0, 1000)
    c = project_curve(np.ones_like(grid), grid, FOURIER_25)
    assert c[0] == pytest.approx(1.0, abs=1e-6)
    assert np.max(np.abs(c[1:])) <= 1e-6


def test_project_basis_functions_round_trip():
    grid = np.linspace(0.0, 1.0, 1000)
    B = basis_matrix(FOURIER_25, grid)
    e3 = np.zeros(25)
    e3[2] = 1.0
    assert_allclose(project_curve(B[2], grid), e3, atol=1e-4)

    both = np.zeros(25)
    both[[4, 7]] = 1.0
    assert_allclose(project_curve(B[4] + B[7], grid), both, atol=1e-4)


def test_project_many_curves_at_once(rng):
    grid = np.linspace(0.0, 1.0, 1000)
    coeffs = rng.standard_normal((5, 25))
    curves = evaluate_curve(coeffs, grid)
    assert_allclose(project_curve(curves, grid), coeffs, atol=1e-8)


def test_parseval_for_curves_in_the_span(rng):
    grid = unit_grid(2001)
    weights = trapezoid_weights(grid)
    for _ in range(10):
        coeffs = rng.standard_normal(25)
        curve = evaluate_curve(coeffs, grid)
        squared_norm = weights @ curve ** 2
        projections = project_curve(curve, grid)
        assert np.sum(projections ** 2) == pytest.approx(squared_norm, rel=1e-8)
        assert squared_norm == pytest.approx(norm(coeffs) ** 2, rel=1e-8)


def test_project_needs_enough_grid_points():
    grid = np.linspace(0.0, 1.0, 10)
    with pytest.raises(DimensionError):
        project_curve(np.zeros(10), grid, FOURIER_25)


def test_project_length_mismatch():
    grid = np.linspace(0.0, 1.0, 100)
    with pytest.raises(DimensionError):
        project_curve(np.zeros(99), grid, FOURIER_25)


def test_raw_grid_basis():
    basis = BasisDescriptor('raw-grid', 101)
    grid = basis.native_grid()
    values = np.sin(3 * grid)
    coeffs = project_curve(values, grid, basis)
    assert_allclose(evaluate_curve(coeffs, grid, basis), values, atol=1e-12)
    assert norm(project_curve(np.ones(101), grid, basis)) == pytest.approx(1.0)

    with pytest.raises(DimensionError):
        basis_matrix(basis, np.linspace(0.0, 1.0, 50))


def test_functional_sample_validation():
    sample = FunctionalSample(np.zeros((4, 25)))
    assert (sample.n, sample.p) == (4, 25)
    with pytest.raises(DimensionError):
        FunctionalSample(np.zeros((4, 3)))
    with pytest.raises(ValueError):
        FunctionalSample(np.full((2, 25), np.nan))
    with pytest.raises(ValueError):
        BasisDescriptor('wavelet', 10)
