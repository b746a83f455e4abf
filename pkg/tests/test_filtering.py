import math

import numpy as np
import pytest
from hypothesis import given, settings
from hypothesis import strategies as st

from oracles import chebyshev_filter_by_eig
from rbfqlsa.quantum.filtering import (
    MAX_GAP,
    FilterSpec,
    apply_filter,
    block_encode_filter,
    chebyshev_t,
    eval_filter,
    filter_degree,
    filter_matrix,
)


def test_chebyshev_matches_numpy():
    y = np.linspace(-3, 3, 61)
    for ell in (0, 1, 5, 12):
        ref = np.polynomial.chebyshev.chebval(y, [0] * ell + [1])
        np.testing.assert_allclose(chebyshev_t(ell, y), ref, rtol=1e-10, atol=1e-12)


def test_frozen_filter_values():
    spec = FilterSpec.from_degree(1, 0.5)
    # R_1(x; 1/2) = 1 - 8 x^2 / 5
    assert eval_filter(0.5, spec) == pytest.approx(0.6, rel=1e-14)
    assert eval_filter(1.0, spec) == pytest.approx(-0.6, rel=1e-14)


@settings(max_examples=50, deadline=None)
@given(st.integers(1, 400), st.floats(0.01, 0.28))
def test_unit_at_zero_and_bounded(ell, gap):
    spec = FilterSpec.from_degree(ell, gap)
    assert eval_filter(0.0, spec) == 1.0
    x = np.linspace(gap, 1.0, 301)
    assert np.all(np.abs(eval_filter(x, spec)) <= spec.bound * (1 + 1e-9))


def test_no_overflow_at_large_degree():
    spec = FilterSpec.from_degree(5000, 0.2)
    vals = eval_filter(np.array([0.0, 1e-3, 0.5]), spec)
    assert np.all(np.isfinite(vals)) and vals[0] == 1.0


def test_degree_selection_is_minimal():
    for gap, eps in [(0.1, 1e-4), (0.05, 1e-6), (0.2, 0.5)]:
        ell = filter_degree(gap, eps)
        assert 2 * math.exp(-math.sqrt(2) * ell * gap) <= eps
        assert ell == 1 or 2 * math.exp(-math.sqrt(2) * (ell - 1) * gap) > eps
    with pytest.raises(ValueError):
        filter_degree(1.5, 1e-3)


def test_spec_rejects_insufficient_degree():
    with pytest.raises(ValueError):
        FilterSpec(2, 0.1, 1e-6)


def test_matrix_filter_matches_eigendecomposition():
    rng = np.random.default_rng(2)
    Q, _ = np.linalg.qr(rng.normal(size=(12, 12)))
    evals = np.concatenate([[0.0], rng.uniform(0.1, 1, 6), -rng.uniform(0.1, 1, 5)])
    H = Q @ np.diag(evals) @ Q.T
    spec = FilterSpec.for_target(0.1, 1e-6)
    v = rng.normal(size=12)
    ref = chebyshev_filter_by_eig(H, spec.degree_ell, spec.gap, v)
    np.testing.assert_allclose(filter_matrix(H, spec) @ v, ref, atol=1e-12)
    out, prob = apply_filter(H, spec, v / np.linalg.norm(v))
    null = Q[:, 0]
    assert abs(abs(out @ null) - 1) < 1e-10
    assert prob == pytest.approx((null @ v) ** 2 / (v @ v), rel=1e-6)


def test_filter_rejects_bad_spectrum():
    spec = FilterSpec.for_target(0.1, 1e-3)
    with pytest.raises(ValueError):
        apply_filter(np.diag([0.0, 2.0]), spec, np.array([1.0, 0.0]))
    with pytest.raises(ValueError):
        apply_filter(np.diag([0.0, 0.5]), spec, np.array([1.0, 1.0]))


def test_filter_block_encoding():
    H = np.diag([0.0, 0.3, -0.7, 1.0])
    spec = FilterSpec.for_target(0.25, 1e-3)
    enc = block_encode_filter(H, spec)
    assert enc.unitarity_error() < 1e-10
    np.testing.assert_allclose(np.diag(enc.block()), eval_filter(np.diag(H), spec), atol=1e-12)


def test_gap_cap():
    assert MAX_GAP == pytest.approx(1 / math.sqrt(12))
