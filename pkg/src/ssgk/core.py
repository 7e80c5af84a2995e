"""Symmetric-matrix containers and the dense eigensolver.

Connectivity matrices, factor sets, and eigendecompositions are immutable
value objects wrapping read-only float64 arrays. The eigensolver is a cyclic
Jacobi iteration; it is self-contained so that results do not depend on the
linked LAPACK build.
"""

from __future__ import annotations

import math
import warnings
from dataclasses import dataclass

import numpy as np

# Construction warns when the symmetrized part differs from the input by more
# than this factor times the Frobenius norm.
ASYMMETRY_WARN_FACTOR = 1e-6

# Off-diagonal Frobenius norm target for the Jacobi sweep, relative to ||X||_F.
JACOBI_TOL_FACTOR = 1e-12


class ConvergenceError(RuntimeError):
    """An iterative solver failed to reach its tolerance within its budget."""


def _readonly(a: np.ndarray) -> np.ndarray:
    out = np.array(a, dtype=np.float64)
    out.setflags(write=False)
    return out


@dataclass(frozen=True, eq=False)
class SymmetricMatrix:
    """An I x I real symmetric matrix.

    Input is symmetrized as (X + X.T) / 2 on construction; a warning is issued
    when the maximum asymmetry exceeds ``ASYMMETRY_WARN_FACTOR * ||X||_F``.
    The stored array is read-only.
    """

    values: np.ndarray

    def __post_init__(self):
        v = np.asarray(self.values, dtype=np.float64)
        if v.ndim != 2 or v.shape[0] != v.shape[1]:
            raise ValueError(f"expected a square 2-d array, got shape {v.shape}")
        if v.shape[0] < 1:
            raise ValueError("matrix must have at least one row")
        if not np.all(np.isfinite(v)):
            raise ValueError("matrix entries must be finite")
        sym = 0.5 * (v + v.T)
        asym = np.abs(v - v.T).max()
        if asym > ASYMMETRY_WARN_FACTOR * np.linalg.norm(sym):
            warnings.warn(
                f"input symmetrized: max asymmetry {asym:.3g}", stacklevel=3
            )
        object.__setattr__(self, "values", _readonly(sym))

    @property
    def dim(self) -> int:
        return self.values.shape[0]


@dataclass(frozen=True, eq=False)
class FactorSet:
    """R factor vectors of dimension I, stored as rows of a (R, I) array.

    ``canonical_sign`` records that every vector has been sign-flipped so its
    largest-magnitude entry is nonnegative.
    """

    vectors: np.ndarray
    canonical_sign: bool = False

    def __post_init__(self):
        v = np.asarray(self.vectors, dtype=np.float64)
        if v.ndim != 2:
            raise ValueError(f"expected a 2-d array of factor rows, got shape {v.shape}")
        if v.shape[0] < 1 or v.shape[1] < 1:
            raise ValueError("factor set must have at least one vector and one dimension")
        if not np.all(np.isfinite(v)):
            raise ValueError("factor entries must be finite")
        if self.canonical_sign:
            for r in range(v.shape[0]):
                if v[r, np.argmax(np.abs(v[r]))] < 0:
                    raise ValueError(f"factor {r} violates the sign convention")
        object.__setattr__(self, "vectors", _readonly(v))

    @property
    def rank(self) -> int:
        return self.vectors.shape[0]

    @property
    def dim(self) -> int:
        return self.vectors.shape[1]


@dataclass(frozen=True, eq=False)
class EigenDecomposition:
    """Eigenvalues in descending order with matching eigenvector columns."""

    eigenvalues: np.ndarray
    eigenvectors: np.ndarray

    def __post_init__(self):
        w = np.asarray(self.eigenvalues, dtype=np.float64)
        v = np.asarray(self.eigenvectors, dtype=np.float64)
        if w.ndim != 1 or v.ndim != 2 or v.shape != (w.size, w.size):
            raise ValueError("eigenvalues and eigenvectors have inconsistent shapes")
        if np.any(np.diff(w) > 0):
            raise ValueError("eigenvalues must be in descending order")
        object.__setattr__(self, "eigenvalues", _readonly(w))
        object.__setattr__(self, "eigenvectors", _readonly(v))


def _values(m) -> np.ndarray:
    return m.values if isinstance(m, SymmetricMatrix) else np.asarray(m, dtype=np.float64)


def matrix_inner(a, b) -> float:
    """Frobenius inner product <A, B> = sum_ij A_ij B_ij.

    Accepts ``SymmetricMatrix`` or plain 2-d arrays of equal shape.
    """
    av, bv = _values(a), _values(b)
    if av.shape != bv.shape:
        raise ValueError(f"shape mismatch: {av.shape} vs {bv.shape}")
    return float(np.dot(av.ravel(), bv.ravel()))


def rank_one_inner(a, b, u, v) -> float:
    """<a b^T, u v^T> = <a, u> <b, v> without forming the outer products."""
    a = np.asarray(a, dtype=np.float64)
    b = np.asarray(b, dtype=np.float64)
    u = np.asarray(u, dtype=np.float64)
    v = np.asarray(v, dtype=np.float64)
    if a.shape != u.shape or b.shape != v.shape:
        raise ValueError("inner-product operands have mismatched lengths")
    return float(np.dot(a, u) * np.dot(b, v))


def reconstruct(factors: FactorSet) -> SymmetricMatrix:
    """Sum of rank-one terms a_r a_r^T; exactly symmetric and PSD."""
    a = factors.vectors
    return SymmetricMatrix(a.T @ a)


def frobenius_residual(x: SymmetricMatrix, factors: FactorSet) -> float:
    """||X - sum_r a_r a_r^T||_F."""
    if factors.dim != x.dim:
        raise ValueError(f"factor dimension {factors.dim} != matrix dimension {x.dim}")
    return float(np.linalg.norm(x.values - reconstruct(factors).values))


def _offdiag_norm(a: np.ndarray) -> float:
    # summed directly over off-diagonal entries; subtracting diagonal mass
    # from the total suffers cancellation once the matrix is nearly diagonal
    off = np.array(a)
    np.fill_diagonal(off, 0.0)
    return float(np.linalg.norm(off))


def symmetric_eig(x: SymmetricMatrix, max_sweeps: int = 100) -> EigenDecomposition:
    """Full eigendecomposition by cyclic Jacobi rotations.

    Sweeps until the off-diagonal Frobenius norm falls below
    ``JACOBI_TOL_FACTOR * ||X||_F``. Eigenvalues are returned in descending
    order; ties keep their pre-sort order. Raises ``ConvergenceError`` if the
    target is not met within ``max_sweeps`` sweeps.
    """
    a = np.array(x.values, dtype=np.float64)
    n = a.shape[0]
    vecs = np.eye(n)
    target = JACOBI_TOL_FACTOR * np.linalg.norm(a)

    off = _offdiag_norm(a)
    for _ in range(max_sweeps):
        if off <= target:
            break
        for p in range(n - 1):
            for q in range(p + 1, n):
                apq = float(a[p, q])
                if apq == 0.0:
                    continue
                app, aqq = float(a[p, p]), float(a[q, q])
                tau = (aqq - app) / (2.0 * apq)
                if abs(tau) > 1e150:
                    # asymptotic small root; tau*tau would overflow
                    t = 0.0 if math.isinf(tau) else 1.0 / (2.0 * tau)
                elif tau >= 0:
                    t = 1.0 / (tau + math.sqrt(1.0 + tau * tau))
                else:
                    t = -1.0 / (-tau + math.sqrt(1.0 + tau * tau))
                c = 1.0 / math.sqrt(1.0 + t * t)
                s = t * c

                # rotate rows and columns p, q of A, then patch the 2x2 block
                # with the closed-form values to keep it exactly zeroed
                col_p, col_q = a[:, p].copy(), a[:, q].copy()
                a[:, p] = c * col_p - s * col_q
                a[:, q] = s * col_p + c * col_q
                row_p, row_q = a[p, :].copy(), a[q, :].copy()
                a[p, :] = c * row_p - s * row_q
                a[q, :] = s * row_p + c * row_q
                a[p, p] = app - t * apq
                a[q, q] = aqq + t * apq
                a[p, q] = 0.0
                a[q, p] = 0.0

                col_p, col_q = vecs[:, p].copy(), vecs[:, q].copy()
                vecs[:, p] = c * col_p - s * col_q
                vecs[:, q] = s * col_p + c * col_q
        off = _offdiag_norm(a)
    else:
        if off > target:
            raise ConvergenceError(
                f"Jacobi sweep limit {max_sweeps} reached with off-diagonal norm "
                f"{off:.3g} above target {target:.3g}"
            )

    w = np.diag(a).copy()
    order = np.argsort(-w, kind="stable")
    return EigenDecomposition(eigenvalues=w[order], eigenvectors=vecs[:, order])
