import numpy as np
import pytest
from hypothesis import given, settings
from hypothesis import strategies as st
from oracle_values import IMQ_HALF, RBF_PAIR_MIDPOINT, RBF_PAIR_WEIGHT

from morgreed.errors import DuplicateCenters
from morgreed.surrogate import FrequencyScaling, rbf_eval, rbf_fit, select_candidates


def test_single_center_weight_is_value():
    sur = rbf_fit([0.3], [0.7])
    assert sur.weights[0] == 0.7
    assert rbf_eval(sur, 0.3) == 0.7


def test_kernel_half_at_one_over_a():
    sur = rbf_fit([0.0], [1.0], a=30)
    assert rbf_eval(sur, 1 / 30) == pytest.approx(IMQ_HALF, rel=1e-15)


def test_symmetric_pair():
    sur = rbf_fit([0.0, 0.05], [1.0, 1.0], a=30)
    np.testing.assert_allclose(sur.weights, [RBF_PAIR_WEIGHT] * 2, rtol=1e-14)
    assert rbf_eval(sur, 0.025) == pytest.approx(RBF_PAIR_MIDPOINT, rel=1e-14)


def test_far_field_decays():
    sur = rbf_fit([0.0, 0.1, 0.2], [1.0, 2.0, 3.0])
    assert abs(rbf_eval(sur, 1e4)) < 1e-6


def test_fifteen_random_values_round_trip(kern):
    rng = np.random.default_rng(15)
    c = np.sort(rng.choice(np.linspace(0, 1, 100), 15, replace=False))
    v = rng.uniform(0, 1, 15)
    sur = rbf_fit(c, v, kernels=kern)
    assert not sur.regularized
    np.testing.assert_allclose(rbf_eval(sur, c, kernels=kern), v, rtol=0, atol=1e-8)


def test_eval_scalar_and_vector():
    sur = rbf_fit([0.0, 0.5], [1.0, 2.0])
    assert isinstance(rbf_eval(sur, 0.1), float)
    assert rbf_eval(sur, np.array([0.1, 0.2])).shape == (2,)


def test_errors():
    with pytest.raises(DuplicateCenters):
        rbf_fit([0.1, 0.1], [1.0, 2.0])
    with pytest.raises(ValueError):
        rbf_fit([0.1], [1.0, 2.0])
    with pytest.raises(ValueError):
        rbf_fit([], [])
    with pytest.raises(ValueError):
        rbf_fit([0.1], [1.0], a=0.0)


def test_regularized_branch_for_near_duplicates():
    # centers 1e-9 apart: the kernel matrix is numerically singular
    c = [0.2, 0.2 + 1e-9, 0.6]
    sur = rbf_fit(c, [1.0, 1.0, 0.5])
    assert sur.regularized
    assert np.all(np.isfinite(sur.weights))
    np.testing.assert_allclose(rbf_eval(sur, np.array(c)), [1.0, 1.0, 0.5], atol=1e-6)


def test_select_dominant_center():
    sur = rbf_fit([0.0, 0.42, 1.0], [0.0, 5.0, 0.0])
    fine = np.linspace(0, 1, 11)
    (x, v), = select_candidates(sur, fine, 1)
    assert x == fine[np.argmin(np.abs(fine - 0.42))]
    assert v == pytest.approx(rbf_eval(sur, x))


def test_select_all_zero_takes_first():
    sur = rbf_fit([0.0, 1.0], [0.0, 0.0])
    fine = np.linspace(0, 1, 7)
    assert select_candidates(sur, fine, 1) == [(0.0, 0.0)]


def test_select_five_descending_distinct():
    rng = np.random.default_rng(5)
    sur = rbf_fit(np.linspace(0, 1, 10), rng.uniform(0, 1, 10))
    fine = np.linspace(0, 1, 100)
    picks = select_candidates(sur, fine, 5)
    xs = [x for x, _ in picks]
    vs = [v for _, v in picks]
    assert len(set(xs)) == 5
    assert vs == sorted(vs, reverse=True)
    allv = rbf_eval(sur, fine)
    assert vs[0] == allv.max()


def test_select_excludes_with_tolerance():
    sur = rbf_fit([0.5], [1.0])
    fine = np.array([0.25, 0.5, 0.75])
    picks = select_candidates(sur, fine, 3, exclude=[0.5 + 1e-15])
    assert [x for x, _ in picks] == [0.25, 0.75]
    assert select_candidates(sur, fine, 0) == []
    assert len(select_candidates(sur, fine, 10)) == 3


def test_frequency_scaling():
    sc = FrequencyScaling(1e8, 1e10)
    np.testing.assert_allclose(sc([1e8, 5.05e9, 1e10]), [0.0, 0.5, 1.0])


@settings(max_examples=50, deadline=None)
@given(m=st.integers(1, 25), seed=st.integers(0, 2**31 - 1), log_axis=st.booleans())
def test_interpolation_property(m, seed, log_axis):
    rng = np.random.default_rng(seed)
    f = np.sort(rng.choice(np.linspace(1e8, 1e10, 110), m, replace=False))
    c = np.log10(f) if log_axis else FrequencyScaling(1e8, 1e10)(f)
    v = rng.uniform(0, 2, m)
    sur = rbf_fit(c, v)
    if not sur.regularized:
        err = np.abs(rbf_eval(sur, c) - v).max() if m > 1 else abs(rbf_eval(sur, c[0]) - v[0])
        assert err <= 1e-8 * max(1.0, v.max())
