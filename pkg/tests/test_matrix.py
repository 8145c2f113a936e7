import io

import numpy as np
import pytest
from hypothesis import given, settings
from hypothesis import strategies as st

from pdrcd.errors import (
    DuplicateEntry,
    EmptyFile,
    ExplicitZero,
    IndexOutOfRange,
    MalformedLine,
    ZeroColumn,
)
from pdrcd.generators import gen_random, gen_tightness_family
from pdrcd.matrix import (
    DualIndexedSparseMatrix,
    build,
    normalize_columns,
    read_libsvm,
    stats,
    transpose,
    write_libsvm,
)
from pdrcd.analyzer import cost_cd, cost_cp

from conftest import dense_costs, random_sparse


def test_singleton():
    X = build([(0, 0, 1.0)], 1, 1)
    assert X.shape == (1, 1) and X.nnz == 1


def test_duplicate_rejected():
    with pytest.raises(DuplicateEntry):
        build([(0, 0, 1), (0, 0, 2)], 1, 1)


def test_explicit_zero_rejected():
    with pytest.raises(ExplicitZero):
        build([(0, 1, 0.0)], 2, 2)


@pytest.mark.parametrize("triple", [(2, 0, 1.0), (0, 5, 1.0), (-1, 0, 1.0)])
def test_out_of_range(triple):
    with pytest.raises(IndexOutOfRange):
        build([triple], 2, 2)


def test_nonfinite_rejected():
    with pytest.raises(ValueError):
        build([(0, 0, np.nan)], 1, 1)


def test_views_agree_with_dense():
    A, X = random_sparse(7, 5, 0.4, seed=1)
    np.testing.assert_array_equal(X.to_dense(), A)
    for i in range(7):
        idx, val = X.row(i)
        np.testing.assert_array_equal(A[i, idx], val)
        assert np.all(np.diff(idx) > 0)
    for j in range(5):
        idx, val = X.col(j)
        np.testing.assert_array_equal(A[idx, j], val)


def test_arrays_are_read_only():
    X = build([(0, 0, 1.0)], 1, 1)
    with pytest.raises(ValueError):
        X.row_val[0] = 2.0


def test_matvec_rmatvec(rng):
    A, X = random_sparse(6, 9, 0.5, seed=2)
    a, w = rng.normal(size=9), rng.normal(size=6)
    np.testing.assert_allclose(X.matvec(a), A @ a, rtol=1e-13)
    np.testing.assert_allclose(X.rmatvec(w), A.T @ w, rtol=1e-13)


def test_transpose_self():
    X = build([(0, 0, 1.0)], 1, 1)
    assert transpose(X) == X


def test_transpose_mirror_swaps_costs():
    X = gen_tightness_family(3, 2, 2.0, 3.0, 5.0)
    Y = transpose(X)
    assert Y.shape == (2, 3)
    np.testing.assert_array_equal(Y.to_dense(), X.to_dense().T)
    assert cost_cp(Y) == cost_cd(X)
    assert cost_cd(Y) == cost_cp(X)


def test_transpose_random_shape():
    X = gen_random(4, 5, seed=0)
    Y = transpose(X)
    assert Y.shape == (5, 4) and Y.nnz == X.nnz
    assert transpose(Y) == X


def test_stats_ones():
    s = stats(DualIndexedSparseMatrix.from_dense(np.ones((2, 3))))
    np.testing.assert_array_equal(s.row_nnz, [3, 3])
    np.testing.assert_array_equal(s.col_nnz, [2, 2, 2])
    assert s.frob_sq == 6


def test_stats_tightness_pattern():
    s = stats(gen_tightness_family(3, 3, 1, 1, 1))
    np.testing.assert_array_equal(s.row_nnz, [3, 1, 1])
    np.testing.assert_array_equal(s.col_nnz, [3, 1, 1])


def test_stats_allow_empty_row():
    X = build([(0, 0, 1.0), (0, 1, 2.0)], 2, 2)
    s = stats(X)
    np.testing.assert_array_equal(s.row_nnz, [2, 0])
    np.testing.assert_array_equal(s.row_sqnorm, [5.0, 0.0])


@settings(max_examples=60, deadline=None)
@given(st.integers(1, 8), st.integers(1, 8), st.floats(0.1, 1.0), st.integers(0, 10**6))
def test_stats_match_dense(d, n, density, seed):
    A, X = random_sparse(d, n, density, seed)
    s = stats(X)
    np.testing.assert_array_equal(s.row_nnz, (A != 0).sum(1))
    np.testing.assert_array_equal(s.col_nnz, (A != 0).sum(0))
    np.testing.assert_allclose(s.row_sqnorm, (A * A).sum(1), rtol=1e-12)
    np.testing.assert_allclose(s.col_sqnorm, (A * A).sum(0), rtol=1e-12)
    cp, cd = dense_costs(A)
    assert cost_cp(X) == pytest.approx(cp, rel=1e-12)
    assert cost_cd(X) == pytest.approx(cd, rel=1e-12)


def test_normalize_single_column():
    X = normalize_columns(DualIndexedSparseMatrix.from_dense([[3.0], [4.0]]))
    np.testing.assert_allclose(X.to_dense().ravel(), [0.6, 0.8])


def test_normalize_divisor_is_mean_norm():
    X = normalize_columns(DualIndexedSparseMatrix.from_dense([[1.0, 3.0]]))
    np.testing.assert_allclose(np.sqrt(stats(X).col_sqnorm), [0.5, 1.5])
    assert X.meta["column_scale"] == 2.0


def test_normalize_mean_norm_one():
    X = normalize_columns(gen_random(9, 13, density=0.3, seed=4))
    assert np.mean(np.sqrt(stats(X).col_sqnorm)) == pytest.approx(1.0, rel=1e-12)


def test_normalize_zero_column():
    with pytest.raises(ZeroColumn):
        normalize_columns(build([(0, 0, 1.0)], 1, 2))


def test_read_libsvm_basic():
    X, y = read_libsvm(io.StringIO("+1 1:0.5 3:2\n-1 2:1\n"))
    assert X.shape == (3, 2) and X.nnz == 3
    np.testing.assert_array_equal(y, [1, -1])
    np.testing.assert_array_equal(X.to_dense(), [[0.5, 0], [0, 1], [2, 0]])


def test_read_libsvm_comments_and_blank_lines():
    X, y = read_libsvm(io.StringIO("# header\n\n1 2:1 # trailing\n"))
    assert X.shape == (2, 1) and y.tolist() == [1.0]


@pytest.mark.parametrize("text, lineno", [
    ("1 0:1\n", 1),
    ("1 1:1\n1 3:1 2:1\n", 2),
    ("1 1\n", 1),
    ("x 1:1\n", 1),
    ("1 1:abc\n", 1),
    ("1 2:1 2:3\n", 1),
])
def test_read_libsvm_malformed(text, lineno):
    with pytest.raises(MalformedLine) as info:
        read_libsvm(io.StringIO(text))
    assert info.value.lineno == lineno


def test_read_libsvm_empty():
    with pytest.raises(EmptyFile):
        read_libsvm(io.StringIO("# nothing\n\n"))


def test_read_libsvm_drops_explicit_zero():
    X, _ = read_libsvm(io.StringIO("1 1:0 2:3\n"))
    assert X.nnz == 1 and X.meta["dropped_zeros"] == 1


def test_read_libsvm_dimension_override():
    X, _ = read_libsvm(io.StringIO("1 2:1\n"), d=5)
    assert X.shape == (5, 1)
    with pytest.raises(IndexOutOfRange):
        read_libsvm(io.StringIO("1 4:1\n"), d=2)


def test_libsvm_round_trip(tmp_path):
    X = gen_random(6, 8, density=0.5, seed=3)
    y = np.where(np.arange(8) % 2 == 0, 1.0, -1.0)
    path = tmp_path / "x.svm"
    write_libsvm(X, y, path)
    X2, y2 = read_libsvm(path, d=6)
    assert X2 == X
    np.testing.assert_array_equal(y2, y)


def test_scipy_round_trip():
    A, X = random_sparse(5, 4, 0.5, seed=7)
    assert DualIndexedSparseMatrix.from_scipy(X.to_scipy()) == X
