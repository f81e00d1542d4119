"""Tests for lagged and long-run covariance operators"""

import numpy as np
import pytest
from numpy.testing import assert_allclose, assert_array_equal

from fcpd.covariance import (BandwidthRule, KernelSpec, covariance_for, demean, lag_cov, long_run_cov,
                             sample_covariance)
from fcpd.errors import LagError
from fcpd.hilbert import BasisDescriptor, FunctionalSample, hs_norm


def _sample(X):
    X = np.asarray(X, dtype=float)
    return FunctionalSample(X, BasisDescriptor('fourier', X.shape[1]))


@pytest.fixture
def pair():
    return _sample([[1.0, 0.0], [-1.0, 0.0]])


def test_demean_examples(rng, pair):
    constant = _sample(np.tile([1.0, 2.0, -3.0], (6, 1)))
    assert_array_equal(demean(constant).coeffs, np.zeros((6, 3)))
    assert_array_equal(demean(pair).coeffs, pair.coeffs)
    X = rng.standard_normal((100, 5)) + 3.0
    assert np.max(np.abs(demean(_sample(X)).coeffs.sum(axis=0))) <= 1e-10


def test_lag_cov_two_point_sample(pair):
    assert lag_cov(pair, 0)[0, 0] == pytest.approx(1.0)
    assert lag_cov(pair, 1)[0, 0] == pytest.approx(-0.5)
    assert_allclose(lag_cov(pair, 0)[1], 0.0)


def test_lag_cov_constant_is_zero():
    constant = _sample(np.tile([2.0, -1.0], (8, 1)))
    for r in (-3, 0, 5):
        assert_array_equal(lag_cov(constant, r), np.zeros((2, 2)))


def test_lag_cov_negative_lag_is_transpose(rng):
    sample = _sample(rng.standard_normal((40, 4)))
    for r in (1, 2, 7):
        assert_array_equal(lag_cov(sample, -r), lag_cov(sample, r).T)


def test_lag_cov_rejects_long_lags(pair):
    with pytest.raises(LagError):
        lag_cov(pair, 2)
    with pytest.raises(LagError):
        lag_cov(pair, -2)


def test_lag_cov_vanishes_for_iid(rng):
    sample = _sample(rng.standard_normal((5000, 3)))
    assert hs_norm(lag_cov(sample, 1)) <= 0.1


def test_kernels():
    flat = KernelSpec.from_name('flattop')
    bartlett = KernelSpec.from_name('bartlett')
    parzen = KernelSpec.from_name('parzen')
    for kernel in (flat, bartlett, parzen):
        assert kernel(0.0) == 1.0
        assert kernel(0.7) == kernel(-0.7)
        assert kernel(1.5) == 0.0
    assert flat(1.0) == 1.0
    assert bartlett(0.5) == pytest.approx(0.5)
    assert parzen(0.5) == pytest.approx(0.25)
    assert flat.weight_sum(1000, 5) == 11.0
    assert KernelSpec('flat-top', a=2.0)(1.5) == 1.0
    with pytest.raises(ValueError):
        KernelSpec.from_name('gaussian')


def test_bandwidth_rule():
    assert BandwidthRule().resolve(5000) == 5
    assert BandwidthRule().resolve(3125) == 5
    assert BandwidthRule().resolve(20000) == 7
    assert BandwidthRule.fixed(10).resolve(5) == 4
    assert BandwidthRule.fixed(3).resolve(100) == 3
    with pytest.raises(ValueError):
        BandwidthRule('fixed', 2.5)


def test_long_run_two_point_sample(pair):
    C = long_run_cov(pair, KernelSpec(), BandwidthRule.fixed(1))
    assert_allclose(C, np.zeros((2, 2)), atol=1e-15)


def test_long_run_close_to_lag_zero_for_iid(rng):
    sample = _sample(rng.standard_normal((5000, 3)))
    C0 = sample_covariance(sample)
    CB = long_run_cov(sample, KernelSpec(), BandwidthRule())
    assert hs_norm(CB - C0) <= 0.15 * hs_norm(C0)


def test_long_run_symmetric_and_shift_invariant(rng):
    X = rng.standard_normal((200, 6))
    sample = _sample(X)
    for kernel in ('flattop', 'bartlett', 'parzen'):
        C = long_run_cov(sample, KernelSpec.from_name(kernel), BandwidthRule.fixed(4))
        assert_array_equal(C, C.T)
        shifted = long_run_cov(_sample(X + 5.0), KernelSpec.from_name(kernel), BandwidthRule.fixed(4))
        assert hs_norm(C - shifted) <= 1e-10


def test_sample_covariance_is_psd(rng):
    C = sample_covariance(_sample(rng.standard_normal((30, 8))))
    assert np.min(np.linalg.eigvalsh(C)) >= -1e-12


def test_long_run_positive_for_dependent_data(rng):
    # moving average: positive lag-one correlation inflates the long-run variance
    e = rng.standard_normal((3001, 2))
    X = e[1:] + e[:-1]
    sample = _sample(X)
    C0 = sample_covariance(sample)
    CB = long_run_cov(sample, KernelSpec.from_name('bartlett'), BandwidthRule.fixed(10))
    assert np.trace(CB) > 1.5 * np.trace(C0)


def test_covariance_for_dispatch(rng):
    sample = _sample(rng.standard_normal((50, 3)))
    assert_array_equal(covariance_for(sample, 'cov0'), sample_covariance(sample))
    assert_array_equal(covariance_for(sample, 'bartlett'), long_run_cov(sample))
    with pytest.raises(ValueError):
        covariance_for(sample, 'median')
