import numpy as np
import pytest
from hypothesis import given, settings
from hypothesis import strategies as st
from scipy import stats as sps

from pdrcd.errors import ImproperSampling, NonpositiveWeight, ZeroSize
from pdrcd.generators import gen_random
from pdrcd.matrix import stats
from pdrcd.sampling import (
    build_alias_table,
    custom,
    importance,
    importance_weights,
    make_rng,
    uniform,
)


def test_uniform_four():
    np.testing.assert_array_equal(uniform(4).probs, [0.25] * 4)


def test_uniform_one_always_zero():
    s = uniform(1)
    np.testing.assert_array_equal(s.probs, [1.0])
    assert np.all(s.draw(make_rng(0), 1000) == 0)
    assert s.draw(make_rng(1)) == 0


def test_uniform_three_frequencies():
    draws = uniform(3).draw(make_rng(0), 10**6)
    freq = np.bincount(draws, minlength=3) / 10**6
    sigma = np.sqrt((1 / 3) * (2 / 3) / 10**6)
    assert np.all(np.abs(freq - 1 / 3) <= 3 * sigma)


def test_importance_constant_is_uniform():
    np.testing.assert_allclose(importance([2.0] * 5).probs, uniform(5).probs, rtol=1e-15)


def test_importance_normalization():
    np.testing.assert_allclose(importance([1.0, 3.0]).probs, [0.25, 0.75], rtol=1e-15)


def test_importance_ratio_constant():
    X = gen_random(5, 7, seed=11)
    s = importance_weights(stats(X).row_sqnorm, 1 / 7, 7, 1.0)
    ratio = s / importance(s).probs
    np.testing.assert_allclose(ratio, ratio[0], rtol=1e-13)


def test_two_point_frequency():
    draws = custom([0.25, 0.75]).draw(make_rng(3), 10**6)
    assert abs(draws.mean() - 0.75) <= 0.002


def test_fixed_seed_reproducible():
    s = importance([1.0, 2.0, 3.0, 4.0])
    a = s.draw(make_rng(42), 1000)
    b = s.draw(make_rng(42), 1000)
    np.testing.assert_array_equal(a, b)
    assert [s.draw(make_rng(7)) for _ in range(3)] == [s.draw(make_rng(7)) for _ in range(3)]


@pytest.mark.parametrize("bad", [[0.5, 0.0, 0.5], [0.5, 0.6], [np.nan, 1.0], [-0.1, 1.1]])
def test_improper_rejected(bad):
    with pytest.raises(ImproperSampling):
        custom(bad)


def test_empty_rejected():
    with pytest.raises(ZeroSize):
        uniform(0)
    with pytest.raises(ZeroSize):
        importance([])


@pytest.mark.parametrize("s", [[1.0, 0.0], [1.0, -2.0], [np.inf, 1.0]])
def test_nonpositive_weight(s):
    with pytest.raises(NonpositiveWeight):
        importance(s)


@settings(max_examples=100, deadline=None)
@given(st.lists(st.floats(1e-6, 1e6), min_size=1, max_size=50))
def test_alias_table_marginals_exact(weights):
    s = importance(weights)
    np.testing.assert_allclose(s.table_marginals(), s.probs, rtol=1e-9, atol=1e-15)
    accept, alias = build_alias_table(s.probs)
    assert np.all((accept >= 0) & (accept <= 1))
    assert np.all((alias >= 0) & (alias < len(weights)))


def test_chi_square_goodness_of_fit():
    p = np.array([0.05, 0.1, 0.15, 0.2, 0.5])
    draws = custom(p).draw(make_rng(2024), 200_000)
    counts = np.bincount(draws, minlength=5)
    _, pvalue = sps.chisquare(counts, 200_000 * p)
    assert pvalue > 1e-4
