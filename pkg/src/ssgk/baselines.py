"""Classical connectome feature extractors used as comparison methods.

Edge flattening, weighted local clustering coefficients, and characteristic
path length. The graph metrics ignore the diagonal throughout. Connectivity
converts to path length as 1/w: stronger connections are shorter edges. This
convention changes CPL values materially, so it is stated here and in the
function docstrings rather than left implicit.
"""

from __future__ import annotations

import numpy as np
from scipy.sparse.csgraph import shortest_path

from .core import SymmetricMatrix


def edge_features(x: SymmetricMatrix) -> np.ndarray:
    """Strict upper triangle flattened row-major; length I(I-1)/2.

    The diagonal is excluded: self-connectivity is not an edge.
    """
    iu = np.triu_indices(x.dim, k=1)
    return x.values[iu].copy()


def _offdiag_weights(x: SymmetricMatrix) -> np.ndarray:
    w = np.array(x.values)
    if np.any(w < 0):
        raise ValueError("graph metrics require nonnegative weights")
    np.fill_diagonal(w, 0.0)
    return w


def clustering_coefficients(x: SymmetricMatrix, mean: bool = False) -> np.ndarray | float:
    """Per-node weighted clustering coefficients (geometric-mean form).

    With weights rescaled by the matrix maximum, node i scores
    ``sum_{j,k} (w_ij w_jk w_ik)^(1/3) / (k_i (k_i - 1))`` over ordered
    neighbor pairs, where k_i counts nonzero neighbors; nodes with fewer than
    two neighbors score 0. An all-zero matrix scores 0 everywhere by
    convention. ``mean`` collapses the vector to its average.
    """
    w = _offdiag_weights(x)
    top = w.max()
    if top == 0.0:
        coeffs = np.zeros(x.dim)
        return float(coeffs.mean()) if mean else coeffs
    cube = np.cbrt(w / top)
    # diag of cube^3 counts each ordered neighbor pair (j, k) once
    triangles = np.diag(cube @ cube @ cube)
    degrees = np.count_nonzero(w > 0, axis=1).astype(np.float64)
    denom = degrees * (degrees - 1.0)
    connected = denom > 0
    coeffs = np.where(connected, triangles / np.where(connected, denom, 1.0), 0.0)
    return float(coeffs.mean()) if mean else coeffs


def characteristic_path_length(x: SymmetricMatrix) -> float:
    """Mean shortest-path distance over reachable ordered node pairs.

    Edge lengths are 1/w for positive weights; zero weights are non-edges.
    Unreachable pairs are excluded from the mean; a graph with no finite
    off-diagonal distance at all is an error.
    """
    w = _offdiag_weights(x)
    lengths = np.zeros_like(w)
    positive = w > 0
    lengths[positive] = 1.0 / w[positive]
    dist = shortest_path(lengths, method="D", directed=False)
    off = ~np.eye(x.dim, dtype=bool)
    finite = np.isfinite(dist) & off
    if not finite.any():
        raise ValueError("no finite path between any pair of nodes")
    return float(dist[finite].mean())
