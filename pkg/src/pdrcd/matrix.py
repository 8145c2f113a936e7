"""Sparse data matrix with simultaneous row-major and column-major access.

The matrix ``X`` has shape ``(d, n)``: rows are features, columns are
examples.  Primal coordinate descent walks rows, dual coordinate descent
walks columns, so both compressed layouts are kept side by side.
"""

from __future__ import annotations

import io
import logging
import os
from dataclasses import dataclass

import numpy as np
from scipy import sparse

from .errors import (
    DuplicateEntry,
    EmptyFile,
    ExplicitZero,
    IndexOutOfRange,
    MalformedLine,
    ZeroColumn,
)

logger = logging.getLogger(__name__)


def _frozen(a):
    a = np.ascontiguousarray(a)
    a.flags.writeable = False
    return a


def _compress(major, minor, vals, size):
    """Sort triples by (major, minor) and build a pointer array."""
    order = np.lexsort((minor, major))
    major, minor, vals = major[order], minor[order], vals[order]
    ptr = np.zeros(size + 1, dtype=np.int64)
    np.cumsum(np.bincount(major, minlength=size), out=ptr[1:])
    return ptr, minor, vals


class DualIndexedSparseMatrix:
    """Immutable ``d x n`` sparse matrix stored in both CSR and CSC form.

    Use :func:`build` (or :meth:`from_arrays`) rather than calling the
    constructor directly; the constructor trusts its inputs.

    Attributes:
      d: number of rows (features).
      n: number of columns (examples).
      meta: free-form provenance, e.g. generator repairs.
    """

    def __init__(self, d, n, row_ptr, row_idx, row_val, col_ptr, col_idx, col_val, meta=None):
        self.d = int(d)
        self.n = int(n)
        self.row_ptr = _frozen(row_ptr)
        self.row_idx = _frozen(row_idx)
        self.row_val = _frozen(row_val)
        self.col_ptr = _frozen(col_ptr)
        self.col_idx = _frozen(col_idx)
        self.col_val = _frozen(col_val)
        self.meta = dict(meta or {})
        self._csr = None

    @classmethod
    def from_arrays(cls, rows, cols, vals, d, n, meta=None):
        rows = np.asarray(rows, dtype=np.int64).ravel()
        cols = np.asarray(cols, dtype=np.int64).ravel()
        vals = np.asarray(vals, dtype=np.float64).ravel()
        if not (rows.size == cols.size == vals.size):
            raise ValueError("rows, cols and vals must have equal length")
        if d < 1 or n < 1:
            raise ValueError(f"shape must be positive, got ({d}, {n})")
        if rows.size:
            bad = (rows < 0) | (rows >= d) | (cols < 0) | (cols >= n)
            if bad.any():
                k = int(np.flatnonzero(bad)[0])
                raise IndexOutOfRange(
                    f"entry ({rows[k]}, {cols[k]}) outside a {d}x{n} matrix"
                )
            if not np.all(np.isfinite(vals)):
                raise ValueError("matrix values must be finite")
            zero = vals == 0.0
            if zero.any():
                k = int(np.flatnonzero(zero)[0])
                raise ExplicitZero(f"explicit zero stored at ({rows[k]}, {cols[k]})")
        row_ptr, row_idx, row_val = _compress(rows, cols, vals, d)
        # Duplicates are adjacent after sorting within a row.
        if row_idx.size > 1:
            row_of = np.repeat(np.arange(d), np.diff(row_ptr))
            dup = (row_of[1:] == row_of[:-1]) & (row_idx[1:] == row_idx[:-1])
            if dup.any():
                k = int(np.flatnonzero(dup)[0])
                raise DuplicateEntry(f"duplicate entry at ({row_of[k]}, {row_idx[k]})")
        col_ptr, col_idx, col_val = _compress(cols, rows, vals, n)
        return cls(d, n, row_ptr, row_idx, row_val, col_ptr, col_idx, col_val, meta)

    @classmethod
    def from_dense(cls, a, meta=None):
        a = np.atleast_2d(np.asarray(a, dtype=np.float64))
        r, c = np.nonzero(a)
        return cls.from_arrays(r, c, a[r, c], a.shape[0], a.shape[1], meta)

    @classmethod
    def from_scipy(cls, m, meta=None):
        coo = sparse.coo_matrix(m)
        coo.sum_duplicates()
        coo.eliminate_zeros()
        return cls.from_arrays(coo.row, coo.col, coo.data, *coo.shape, meta=meta)

    @property
    def shape(self):
        return (self.d, self.n)

    @property
    def nnz(self):
        return int(self.row_idx.size)

    def row(self, i):
        """Column indices and values of row ``i``."""
        lo, hi = self.row_ptr[i], self.row_ptr[i + 1]
        return self.row_idx[lo:hi], self.row_val[lo:hi]

    def col(self, j):
        """Row indices and values of column ``j``."""
        lo, hi = self.col_ptr[j], self.col_ptr[j + 1]
        return self.col_idx[lo:hi], self.col_val[lo:hi]

    @property
    def row_nnz(self):
        return np.diff(self.row_ptr)

    @property
    def col_nnz(self):
        return np.diff(self.col_ptr)

    def triples(self, order="row"):
        """Return ``(rows, cols, vals)`` arrays in row-major or column-major order."""
        if order == "row":
            rows = np.repeat(np.arange(self.d), self.row_nnz)
            return rows, self.row_idx.copy(), self.row_val.copy()
        if order == "col":
            cols = np.repeat(np.arange(self.n), self.col_nnz)
            return self.col_idx.copy(), cols, self.col_val.copy()
        raise ValueError(f"unknown order {order!r}")

    def to_scipy(self):
        if self._csr is None:
            self._csr = sparse.csr_matrix(
                (self.row_val, self.row_idx, self.row_ptr), shape=self.shape
            )
        return self._csr

    def to_dense(self):
        return self.to_scipy().toarray()

    def matvec(self, alpha):
        """``X @ alpha`` for ``alpha`` of length ``n``."""
        return self.to_scipy() @ np.asarray(alpha, dtype=np.float64)

    def rmatvec(self, w):
        """``X.T @ w`` for ``w`` of length ``d``."""
        return self.to_scipy().T @ np.asarray(w, dtype=np.float64)

    def transpose(self):
        return transpose(self)

    @property
    def T(self):
        return transpose(self)

    def with_meta(self, **updates):
        meta = {**self.meta, **updates}
        return DualIndexedSparseMatrix(
            self.d, self.n, self.row_ptr, self.row_idx, self.row_val,
            self.col_ptr, self.col_idx, self.col_val, meta,
        )

    def __eq__(self, other):
        if not isinstance(other, DualIndexedSparseMatrix):
            return NotImplemented
        return (
            self.shape == other.shape
            and np.array_equal(self.row_ptr, other.row_ptr)
            and np.array_equal(self.row_idx, other.row_idx)
            and np.array_equal(self.row_val, other.row_val)
        )

    __hash__ = None

    def __repr__(self):
        return f"DualIndexedSparseMatrix(d={self.d}, n={self.n}, nnz={self.nnz})"


def build(triples, d, n, meta=None):
    """Build a matrix from an iterable of ``(row, col, value)`` triples.

    Raises:
      DuplicateEntry: a ``(row, col)`` pair appears twice.
      ExplicitZero: a stored value is exactly zero.
      IndexOutOfRange: an index falls outside ``d x n``.
    """
    triples = list(triples)
    if triples:
        rows, cols, vals = zip(*triples)
    else:
        rows, cols, vals = (), (), ()
    return DualIndexedSparseMatrix.from_arrays(rows, cols, vals, d, n, meta)


def transpose(X):
    """Swap the two views; ``transpose(transpose(X)) == X``."""
    return DualIndexedSparseMatrix(
        X.n, X.d, X.col_ptr, X.col_idx, X.col_val,
        X.row_ptr, X.row_idx, X.row_val, X.meta,
    )


@dataclass(frozen=True)
class StructureStats:
    row_nnz: np.ndarray
    col_nnz: np.ndarray
    row_sqnorm: np.ndarray
    col_sqnorm: np.ndarray
    frob_sq: float


def _segment_sum(values, ptr):
    out = np.zeros(ptr.size - 1)
    counts = np.diff(ptr)
    nz = counts > 0
    if values.size:
        out[nz] = np.add.reduceat(values, ptr[:-1][nz])
    return out


def stats(X):
    """Row/column nonzero counts and squared norms, one pass per view."""
    row_sq = _segment_sum(X.row_val**2, X.row_ptr)
    col_sq = _segment_sum(X.col_val**2, X.col_ptr)
    return StructureStats(
        row_nnz=X.row_nnz,
        col_nnz=X.col_nnz,
        row_sqnorm=row_sq,
        col_sqnorm=col_sq,
        frob_sq=float(np.sum(X.row_val**2)),
    )


def normalize_columns(X):
    """Divide every entry by the average column Euclidean norm.

    Raises:
      ZeroColumn: some column has no stored entries.
    """
    st = stats(X)
    empty = np.flatnonzero(st.col_nnz == 0)
    if empty.size:
        raise ZeroColumn(f"column {int(empty[0])} is all zero")
    scale = float(np.mean(np.sqrt(st.col_sqnorm)))
    return DualIndexedSparseMatrix(
        X.d, X.n, X.row_ptr, X.row_idx, X.row_val / scale,
        X.col_ptr, X.col_idx, X.col_val / scale,
        {**X.meta, "column_scale": scale},
    )


def _open_text(source):
    if isinstance(source, (str, os.PathLike)):
        return open(source, "r", encoding="utf-8"), True
    return source, False


def read_libsvm(source, d=None):
    """Parse LIBSVM text; column ``j`` of the result is example ``j``.

    ``source`` is a path or a text stream.  ``d`` defaults to the largest
    feature index seen and may only be raised, never lowered.  Explicit
    ``idx:0`` entries are dropped and counted in ``X.meta['dropped_zeros']``.

    Returns:
      ``(X, labels)``
    """
    fh, owned = _open_text(source)
    rows, cols, vals, labels = [], [], [], []
    dropped = 0
    try:
        for lineno, line in enumerate(fh, start=1):
            line = line.split("#", 1)[0].strip()
            if not line:
                continue
            tokens = line.split()
            try:
                labels.append(float(tokens[0]))
            except ValueError:
                raise MalformedLine(lineno, f"bad label {tokens[0]!r}") from None
            j = len(labels) - 1
            prev = 0
            for tok in tokens[1:]:
                idx, sep, val = tok.partition(":")
                if not sep:
                    raise MalformedLine(lineno, f"expected idx:val, got {tok!r}")
                try:
                    k = int(idx)
                    v = float(val)
                except ValueError:
                    raise MalformedLine(lineno, f"non-numeric token {tok!r}") from None
                if k < 1:
                    raise MalformedLine(lineno, f"feature index must be >= 1, got {k}")
                if k <= prev:
                    raise MalformedLine(lineno, f"feature index {k} not increasing")
                if not np.isfinite(v):
                    raise MalformedLine(lineno, f"non-finite value {tok!r}")
                prev = k
                if v == 0.0:
                    dropped += 1
                    continue
                rows.append(k - 1)
                cols.append(j)
                vals.append(v)
    finally:
        if owned:
            fh.close()
    if not labels:
        raise EmptyFile("no examples found")
    max_idx = max(rows) + 1 if rows else 1
    if d is None:
        d = max_idx
    elif d < max_idx:
        raise IndexOutOfRange(f"d={d} is smaller than the largest feature index {max_idx}")
    if dropped:
        logger.warning("dropped %d explicit zero entries", dropped)
    X = DualIndexedSparseMatrix.from_arrays(
        rows, cols, vals, d, len(labels), meta={"dropped_zeros": dropped}
    )
    return X, np.asarray(labels, dtype=np.float64)


def write_libsvm(X, labels, dest=None):
    """Write ``X`` (columns as examples) in LIBSVM format.

    Returns the text when ``dest`` is None.
    """
    labels = np.asarray(labels, dtype=np.float64)
    if labels.shape != (X.n,):
        raise ValueError(f"need {X.n} labels, got shape {labels.shape}")
    buf = io.StringIO()
    for j in range(X.n):
        idx, val = X.col(j)
        parts = [_fmt(labels[j])]
        parts += [f"{i + 1}:{v!r}" for i, v in zip(idx.tolist(), val.tolist())]
        buf.write(" ".join(parts) + "\n")
    text = buf.getvalue()
    if dest is None:
        return text
    fh, owned = (open(dest, "w", encoding="utf-8"), True) if isinstance(dest, (str, os.PathLike)) else (dest, False)
    try:
        fh.write(text)
    finally:
        if owned:
            fh.close()
    return None


def _fmt(y):
    return str(int(y)) if float(y).is_integer() else repr(float(y))
