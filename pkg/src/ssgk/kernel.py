"""Squared-base-kernel graph kernel and Gram matrix assembly.

The graph kernel between two factor sets is the sum of squared base-kernel
values over all factor pairs:

    kappa(X, Y) = sum_{p,q} k(x_p, y_q)^2

With an RBF base kernel each squared term is itself a kernel value, so the
Gram matrix is positive semidefinite for any collection of factor sets.
"""

from __future__ import annotations

from dataclasses import dataclass
from typing import Callable, NamedTuple, Sequence

import numpy as np

from . import _textio
from .core import SymmetricMatrix, symmetric_eig

BaseKernel = Callable[[np.ndarray, np.ndarray], np.ndarray]


@dataclass(frozen=True)
class RbfParams:
    """Bandwidth of ``k(x, y) = exp(-gamma * ||x - y||^2)``."""

    gamma: float

    def __post_init__(self):
        if not (self.gamma > 0.0 and np.isfinite(self.gamma)):
            raise ValueError(f"gamma must be finite and > 0, got {self.gamma}")


@dataclass(frozen=True, eq=False)
class GramMatrix:
    """Symmetric kernel matrix with optional row identifiers."""

    values: np.ndarray
    row_ids: tuple[str, ...] | None = None

    def __post_init__(self):
        v = np.asarray(self.values, dtype=np.float64)
        if v.ndim != 2 or v.shape[0] != v.shape[1]:
            raise ValueError(f"expected a square 2-d array, got shape {v.shape}")
        if not np.all(np.isfinite(v)):
            raise ValueError("Gram entries must be finite")
        scale = max(1.0, float(np.abs(v).max())) if v.size else 1.0
        if np.abs(v - v.T).max() > 1e-12 * scale:
            raise ValueError("Gram matrix is not symmetric")
        if np.any(np.diag(v) < 0):
            raise ValueError("Gram diagonal must be nonnegative")
        if self.row_ids is not None and len(self.row_ids) != v.shape[0]:
            raise ValueError(
                f"{len(self.row_ids)} row ids for {v.shape[0]} rows"
            )
        out = v.copy()
        out.setflags(write=False)
        object.__setattr__(self, "values", out)

    @property
    def size(self) -> int:
        return self.values.shape[0]


class PsdReport(NamedTuple):
    min_eig: float
    is_psd: bool


def rbf(x, y, params: RbfParams) -> float:
    """``exp(-gamma * ||x - y||^2)`` for a single vector pair."""
    x = np.asarray(x, dtype=np.float64)
    y = np.asarray(y, dtype=np.float64)
    if x.shape != y.shape:
        raise ValueError(f"shape mismatch: {x.shape} vs {y.shape}")
    d = x - y
    return float(np.exp(-params.gamma * np.dot(d, d)))


def rbf_matrix(x: np.ndarray, y: np.ndarray, params: RbfParams) -> np.ndarray:
    """RBF values for all row pairs of (P, I) x and (Q, I) y.

    Distances come from explicit row differences rather than the norm-expansion
    identity; slightly slower, but free of cancellation error even at large
    gamma.
    """
    x = np.atleast_2d(np.asarray(x, dtype=np.float64))
    y = np.atleast_2d(np.asarray(y, dtype=np.float64))
    if x.shape[1] != y.shape[1]:
        raise ValueError(f"dimension mismatch: {x.shape[1]} vs {y.shape[1]}")
    out = np.empty((x.shape[0], y.shape[0]))
    for p in range(x.shape[0]):
        d = y - x[p]
        out[p] = np.exp(-params.gamma * np.einsum("ij,ij->i", d, d))
    return out


def ssgk(
    fx, fy, params: RbfParams, base_kernel: BaseKernel | None = None
) -> float:
    """Graph kernel value ``sum_{p,q} k(x_p, y_q)^2`` between two factor sets.

    ``base_kernel`` replaces the RBF when given; it must map (P, I) and (Q, I)
    row stacks to the (P, Q) matrix of base kernel values.
    """
    if fx.dim != fy.dim:
        raise ValueError(f"factor dimension mismatch: {fx.dim} vs {fy.dim}")
    if base_kernel is None:
        k = rbf_matrix(fx.vectors, fy.vectors, params)
    else:
        k = np.asarray(base_kernel(fx.vectors, fy.vectors), dtype=np.float64)
        if k.shape != (fx.rank, fy.rank):
            raise ValueError(
                f"base kernel returned shape {k.shape}, expected {(fx.rank, fy.rank)}"
            )
    return float(np.sum(k * k))


def _stack(factor_sets) -> tuple[np.ndarray, np.ndarray]:
    dims = {f.dim for f in factor_sets}
    if len(dims) > 1:
        raise ValueError(f"factor sets have mixed dimensions: {sorted(dims)}")
    offsets = np.cumsum([0] + [f.rank for f in factor_sets])
    return np.vstack([f.vectors for f in factor_sets]), offsets


def _block_sums(sq: np.ndarray, row_off: np.ndarray, col_off: np.ndarray) -> np.ndarray:
    # np.add.reduceat over rows then columns sums each factor-set block.
    by_rows = np.add.reduceat(sq, row_off[:-1], axis=0)
    return np.add.reduceat(by_rows, col_off[:-1], axis=1)


def build_gram(
    factor_sets: Sequence,
    params: RbfParams,
    base_kernel: BaseKernel | None = None,
    normalize: bool = False,
    row_ids: Sequence[str] | None = None,
) -> GramMatrix:
    """Kernel matrix over a list of factor sets.

    All pairwise base-kernel values are computed on the stacked factor rows,
    squared, and block-summed, which matches the pairwise ``ssgk`` values.
    The upper triangle is mirrored so the result is exactly symmetric. With
    ``normalize`` each entry is divided by ``sqrt(K_ii * K_jj)``.
    """
    if len(factor_sets) == 0:
        raise ValueError("need at least one factor set")
    stacked, offsets = _stack(factor_sets)
    if base_kernel is None:
        k = rbf_matrix(stacked, stacked, params)
    else:
        k = np.asarray(base_kernel(stacked, stacked), dtype=np.float64)
    g = _block_sums(k * k, offsets, offsets)
    g = np.triu(g) + np.triu(g, 1).T
    if normalize:
        d = np.sqrt(np.diag(g))
        if np.any(d == 0):
            raise ValueError("cannot normalize: zero self-kernel on the diagonal")
        g = g / np.outer(d, d)
    ids = tuple(row_ids) if row_ids is not None else None
    return GramMatrix(g, ids)


def build_cross_gram(
    test_sets: Sequence,
    train_sets: Sequence,
    params: RbfParams,
    base_kernel: BaseKernel | None = None,
    normalize: bool = False,
) -> np.ndarray:
    """Rectangular kernel matrix: rows are test factor sets, columns training ones."""
    if len(train_sets) == 0:
        raise ValueError("need at least one training factor set")
    if len(test_sets) == 0:
        return np.zeros((0, len(train_sets)))
    rows, row_off = _stack(test_sets)
    cols, col_off = _stack(train_sets)
    if rows.shape[1] != cols.shape[1]:
        raise ValueError(
            f"factor dimension mismatch: {rows.shape[1]} vs {cols.shape[1]}"
        )
    if base_kernel is None:
        k = rbf_matrix(rows, cols, params)
    else:
        k = np.asarray(base_kernel(rows, cols), dtype=np.float64)
    g = _block_sums(k * k, row_off, col_off)
    if normalize:
        d_test = np.array([ssgk(f, f, params, base_kernel) for f in test_sets])
        d_train = np.array([ssgk(f, f, params, base_kernel) for f in train_sets])
        if np.any(d_test == 0) or np.any(d_train == 0):
            raise ValueError("cannot normalize: zero self-kernel")
        g = g / np.sqrt(np.outer(d_test, d_train))
    return g


def vector_gram(
    features: np.ndarray,
    params: RbfParams,
    row_ids: Sequence[str] | None = None,
) -> GramMatrix:
    """Plain RBF Gram matrix over feature-vector rows (for baseline methods)."""
    x = np.atleast_2d(np.asarray(features, dtype=np.float64))
    k = rbf_matrix(x, x, params)
    k = np.triu(k) + np.triu(k, 1).T
    ids = tuple(row_ids) if row_ids is not None else None
    return GramMatrix(k, ids)


def vector_cross_gram(
    test_features: np.ndarray, train_features: np.ndarray, params: RbfParams
) -> np.ndarray:
    """Rectangular RBF kernel matrix between two feature-vector stacks."""
    return rbf_matrix(test_features, train_features, params)


def psd_report(gram: GramMatrix, tol: float = 1e-8) -> PsdReport:
    """Minimum eigenvalue and whether it clears ``-tol * max(1, max_eig)``."""
    w = symmetric_eig(SymmetricMatrix(gram.values)).eigenvalues
    min_eig = float(w[-1])
    return PsdReport(min_eig, min_eig >= -tol * max(1.0, float(w[0])))


def save_gram(gram: GramMatrix, path: str) -> None:
    """Writes size, then one row per line at 17 significant digits."""
    lines = [str(gram.size)]
    lines.extend(_textio.format_row(row) for row in gram.values)
    _textio.write_lines(path, lines)


def load_gram(path: str) -> GramMatrix:
    """Reads the ``save_gram`` format; '#' lines are comments."""
    reader = _textio.LineReader(path)
    line = reader.next_data_line()
    if line is None:
        reader.fail("empty file, expected matrix size")
    tokens = line.split()
    if len(tokens) != 1 or not tokens[0].isdigit() or int(tokens[0]) < 1:
        reader.fail(f"expected a positive matrix size, got {line.strip()!r}")
    n = int(tokens[0])
    values = _textio.read_square_block(reader, n)
    _textio.expect_end(reader)
    try:
        return GramMatrix(values)
    except ValueError as exc:
        raise _textio.DataFileError(f"{path}: {exc}") from exc
