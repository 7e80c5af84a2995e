"""Soft-margin SVM on precomputed kernel matrices.

The binary solver is sequential minimal optimization over the dual problem
with a max-violating-pair working set and a seeded-random fallback for the
second multiplier. Multiclass goes through a one-vs-one vote. Everything is
deterministic given the config seed.
"""

from __future__ import annotations

import warnings
from dataclasses import dataclass
from typing import Sequence

import numpy as np

from . import _textio
from .core import SymmetricMatrix, symmetric_eig

# Alpha above this counts as a support vector; also the margin used to call a
# multiplier interior (strictly inside the box) for the bias average.
SUPPORT_TOL = 1e-12

# Relative alpha change below which a pair step is treated as a no-op.
STEP_TOL = 1e-14

# Multipliers within this fraction of c of a box bound snap onto the bound,
# so rounding dust cannot leave a sample in the working set with a step
# window too small to use.
SNAP_TOL = 1e-12


@dataclass(frozen=True)
class SvmConfig:
    """Regularization and solver settings for one binary SMO run."""

    c: float
    kkt_tol: float = 1e-3
    max_passes: int = 10
    max_iters: int = 1_000_000
    seed: int = 0

    def __post_init__(self):
        if not (self.c > 0.0 and np.isfinite(self.c)):
            raise ValueError(f"c must be finite and > 0, got {self.c}")
        if not (self.kkt_tol > 0.0):
            raise ValueError(f"kkt_tol must be > 0, got {self.kkt_tol}")
        if self.max_passes < 1 or self.max_iters < 1:
            raise ValueError("max_passes and max_iters must be >= 1")


@dataclass(frozen=True, eq=False)
class BinaryModel:
    """Dual solution over one training set slice."""

    alphas: np.ndarray
    bias: float
    labels: np.ndarray
    converged: bool = True

    def __post_init__(self):
        a = np.asarray(self.alphas, dtype=np.float64)
        y = np.asarray(self.labels, dtype=np.float64)
        if a.shape != y.shape or a.ndim != 1:
            raise ValueError("alphas and labels must be 1-d arrays of equal length")
        a = a.copy()
        y = y.copy()
        a.setflags(write=False)
        y.setflags(write=False)
        object.__setattr__(self, "alphas", a)
        object.__setattr__(self, "labels", y)

    @property
    def support_indices(self) -> np.ndarray:
        return np.flatnonzero(self.alphas > SUPPORT_TOL)


@dataclass(frozen=True, eq=False)
class PairwiseModel:
    """One class pair's binary model plus its rows in the full training set."""

    first: str
    second: str
    indices: np.ndarray
    model: BinaryModel

    def __post_init__(self):
        idx = np.asarray(self.indices, dtype=np.int64).copy()
        idx.setflags(write=False)
        object.__setattr__(self, "indices", idx)


@dataclass(frozen=True, eq=False)
class MulticlassModel:
    """One-vs-one ensemble over ``classes`` (sorted label order)."""

    classes: tuple[str, ...]
    pairwise: tuple[PairwiseModel, ...]
    n_train: int

    def __post_init__(self):
        k = len(self.classes)
        if len(self.pairwise) != k * (k - 1) // 2:
            raise ValueError(
                f"{len(self.pairwise)} pairwise models for {k} classes, "
                f"expected {k * (k - 1) // 2}"
            )


def _gram_values(gram) -> np.ndarray:
    values = gram.values if hasattr(gram, "values") else np.asarray(gram, dtype=np.float64)
    if values.ndim != 2 or values.shape[0] != values.shape[1]:
        raise ValueError(f"expected a square kernel matrix, got shape {values.shape}")
    if not np.all(np.isfinite(values)):
        raise ValueError("non-finite Gram entries")
    return values


def train_binary(gram, y, config: SvmConfig) -> BinaryModel:
    """Solves the binary soft-margin dual by SMO.

    The working pair is the maximal KKT violator: the lowest bias-free error
    over the "up" index set against the highest over the "low" set. When that
    pair cannot make progress, partners are retried in seeded-random order.
    Training stops when the violation gap falls within ``kkt_tol``, after
    ``max_passes`` consecutive stalled selections, or at the iteration cap
    (the last two return the current iterate flagged as non-converged).

    Parameters
    ----------
    gram : GramMatrix or (n, n) array
        Kernel values over the training samples.
    y : array of +-1
        Binary labels, both classes present.
    config : SvmConfig
        Box constraint, tolerance, caps, and fallback seed.

    Returns
    -------
    BinaryModel
        Alphas in [0, C], bias, labels, and the convergence flag.
    """
    k = _gram_values(gram)
    y = np.asarray(y, dtype=np.float64)
    n = k.shape[0]
    if y.shape != (n,):
        raise ValueError(f"{y.shape} labels for a {n}x{n} Gram")
    if not np.all(np.abs(y) == 1.0):
        raise ValueError("labels must be +1 or -1")
    if np.all(y == y[0]):
        raise ValueError("single-class input")

    c = config.c
    tol = config.kkt_tol
    snap = SNAP_TOL * c
    rng = np.random.default_rng(config.seed)
    alpha = np.zeros(n)
    # f holds the bias-free errors sum_j alpha_j y_j K_ij - y_i.
    f = -y.copy()
    y_pos = y > 0
    indefinite = False

    def take_step(i: int, j: int) -> bool:
        nonlocal f, indefinite
        if i == j:
            return False
        ai, aj = alpha[i], alpha[j]
        yi, yj = y[i], y[j]
        if yi == yj:
            lo, hi = max(0.0, ai + aj - c), min(c, ai + aj)
        else:
            lo, hi = max(0.0, aj - ai), min(c, c + aj - ai)
        if lo >= hi:
            return False
        kii, kjj, kij = k[i, i], k[j, j], k[i, j]
        eta = kii + kjj - 2.0 * kij
        fi, fj = f[i], f[j]
        if eta > 0.0:
            aj_new = aj + yj * (fi - fj) / eta
            aj_new = min(max(aj_new, lo), hi)
        else:
            if eta < -1e-12 * (kii + kjj):
                indefinite = True
            # Dual objective change for moving alpha_j to t along the
            # constraint line; concavity is lost, so compare the endpoints.
            gi, gj = fi + yi, fj + yj

            def gain(t: float) -> float:
                dj = t - aj
                di = -yi * yj * dj
                return (
                    di + dj - yi * di * gi - yj * dj * gj
                    - 0.5 * (kii * di * di + kjj * dj * dj)
                    - yi * yj * kij * di * dj
                )

            glo, ghi = gain(lo), gain(hi)
            if max(glo, ghi) <= 0.0:
                return False
            aj_new = lo if glo > ghi else hi
        if aj_new < snap:
            aj_new = 0.0
        elif aj_new > c - snap:
            aj_new = c
        if abs(aj_new - aj) < STEP_TOL * (aj_new + aj + STEP_TOL):
            return False
        ai_new = ai + yi * yj * (aj - aj_new)
        if ai_new < snap:
            ai_new = 0.0
        elif ai_new > c - snap:
            ai_new = c
        di, dj = yi * (ai_new - ai), yj * (aj_new - aj)
        f += di * k[i]
        f += dj * k[j]
        alpha[i] = ai_new
        alpha[j] = aj_new
        return True

    iters = 0
    stalls = 0
    converged = False
    while iters < config.max_iters:
        up_mask = np.where(y_pos, alpha < c, alpha > 0.0)
        low_mask = np.where(y_pos, alpha > 0.0, alpha < c)
        j = int(np.where(up_mask, f, np.inf).argmin())
        i = int(np.where(low_mask, f, -np.inf).argmax())
        m_up = f[j] if up_mask[j] else np.inf
        m_low = f[i] if low_mask[i] else -np.inf
        if m_low - m_up <= tol:
            converged = True
            break
        iters += 1
        if take_step(i, j):
            stalls = 0
            continue
        progressed = False
        for j2 in rng.permutation(np.flatnonzero(up_mask)):
            if take_step(i, int(j2)):
                progressed = True
                break
        if not progressed:
            for i2 in rng.permutation(np.flatnonzero(low_mask)):
                if take_step(int(i2), j):
                    progressed = True
                    break
        if progressed:
            stalls = 0
        else:
            stalls += 1
            if stalls >= config.max_passes:
                break

    if not converged:
        warnings.warn(
            f"SMO stopped after {iters} iterations with KKT gap above {tol}",
            stacklevel=2,
        )
    if indefinite:
        min_eig = symmetric_eig(SymmetricMatrix(k)).eigenvalues[-1]
        warnings.warn(
            f"Gram matrix is not positive semidefinite (min eigenvalue {min_eig:.3g})",
            stacklevel=2,
        )

    # Recompute errors from scratch for the bias; the incremental cache has
    # accumulated rounding from the pair updates.
    g = k @ (alpha * y)
    f_exact = g - y
    interior = (alpha > SUPPORT_TOL) & (c - alpha > SUPPORT_TOL)
    if interior.any():
        bias = float(np.mean(y[interior] - g[interior]))
    else:
        up_mask = np.where(y_pos, alpha < c, alpha > 0.0)
        low_mask = np.where(y_pos, alpha > 0.0, alpha < c)
        m_up = float(f_exact[up_mask].min()) if up_mask.any() else np.inf
        m_low = float(f_exact[low_mask].max()) if low_mask.any() else -np.inf
        if np.isfinite(m_up) and np.isfinite(m_low):
            bias = -0.5 * (m_up + m_low)
        elif np.isfinite(m_low):
            bias = -m_low
        else:
            bias = -m_up
    return BinaryModel(alpha, bias, y, converged)


def decision(model: BinaryModel, kernel_row) -> float | np.ndarray:
    """Dual decision value ``sum_i alpha_i y_i k(x_i, x) + b``.

    Accepts one kernel row (returns a float) or a stack of rows (returns an
    array). Classify by sign, with 0 mapping to +1.
    """
    row = np.asarray(kernel_row, dtype=np.float64)
    if row.shape[-1] != model.alphas.size:
        raise ValueError(
            f"kernel row length {row.shape[-1]} != training size {model.alphas.size}"
        )
    scores = row @ (model.alphas * model.labels) + model.bias
    return float(scores) if row.ndim == 1 else scores


def train_multiclass(gram, labels: Sequence[str], config: SvmConfig) -> MulticlassModel:
    """Trains one binary model per unordered class pair (one-vs-one).

    Classes are ordered by sorted label; within a pair the first class maps to
    +1. Each pair trains on the sub-Gram of its samples in manifest order.
    """
    k = _gram_values(gram)
    labs = np.asarray(labels, dtype=object)
    if labs.shape != (k.shape[0],):
        raise ValueError(f"{labs.size} labels for a {k.shape[0]}x{k.shape[0]} Gram")
    classes = tuple(sorted(set(labs.tolist())))
    if len(classes) < 2:
        raise ValueError("fewer than 2 classes")
    pairwise = []
    for a_pos, first in enumerate(classes):
        for second in classes[a_pos + 1:]:
            idx = np.flatnonzero((labs == first) | (labs == second))
            y = np.where(labs[idx] == first, 1.0, -1.0)
            sub = k[np.ix_(idx, idx)]
            pairwise.append(
                PairwiseModel(first, second, idx, train_binary(sub, y, config))
            )
    return MulticlassModel(classes, tuple(pairwise), k.shape[0])


def predict(model: MulticlassModel, cross) -> list[str]:
    """Labels for each row of the test-by-train kernel matrix.

    Each pairwise model votes for one class per sample; the most-voted class
    wins. Vote ties fall to the larger sum of absolute decision values over
    the class's pairwise models, then to the earlier class in ``classes``.
    """
    rows = np.atleast_2d(np.asarray(cross, dtype=np.float64))
    if rows.shape[1] != model.n_train:
        raise ValueError(
            f"cross matrix has {rows.shape[1]} columns, expected {model.n_train}"
        )
    m = rows.shape[0]
    pos = {label: p for p, label in enumerate(model.classes)}
    votes = np.zeros((m, len(model.classes)), dtype=np.int64)
    margins = np.zeros((m, len(model.classes)))
    for pair in model.pairwise:
        scores = np.atleast_1d(decision(pair.model, rows[:, pair.indices]))
        first_wins = scores >= 0.0
        a, b = pos[pair.first], pos[pair.second]
        votes[first_wins, a] += 1
        votes[~first_wins, b] += 1
        margins[:, a] += np.abs(scores)
        margins[:, b] += np.abs(scores)
    best = np.zeros(m, dtype=np.int64)
    for kk in range(1, len(model.classes)):
        better = (votes[:, kk] > votes[np.arange(m), best]) | (
            (votes[:, kk] == votes[np.arange(m), best])
            & (margins[:, kk] > margins[np.arange(m), best])
        )
        best[better] = kk
    return [model.classes[b] for b in best]


def accuracy(predicted: Sequence[str], truth: Sequence[str]) -> float:
    """Percentage of matches, rounded to two decimals."""
    if len(predicted) == 0 or len(predicted) != len(truth):
        raise ValueError(
            f"need equal nonempty label lists, got {len(predicted)} and {len(truth)}"
        )
    correct = sum(p == t for p, t in zip(predicted, truth))
    return round(100.0 * correct / len(predicted), 2)


def save_model(path: str, model: MulticlassModel, meta: dict) -> None:
    """Serializes a multiclass model plus the kernel settings that built it.

    ``meta`` carries method, c, gamma, and (for the factor-based kernel) rank,
    lam, and the normalize flag, so prediction can rebuild the cross-kernel
    matrix without re-specifying hyperparameters.
    """
    fv = _textio.format_value
    lines = [
        f"n {model.n_train}",
        "classes " + " ".join(model.classes),
        f"method {meta.get('method', 'ssgk')}",
        f"c {fv(meta['c'])}",
        f"gamma {fv(meta['gamma'])}",
    ]
    if meta.get("method", "ssgk") == "ssgk":
        lines.append(f"rank {int(meta['rank'])}")
        lines.append(f"lam {fv(meta['lam'])}")
        lines.append(f"normalize {1 if meta.get('normalize') else 0}")
    if meta.get("method") == "cc":
        lines.append(f"cc_mean {1 if meta.get('cc_mean') else 0}")
    lines.append(f"pairs {len(model.pairwise)}")
    for pair in model.pairwise:
        bm = pair.model
        lines.append(f"pair {pair.first} {pair.second}")
        lines.append(
            f"indices {pair.indices.size} " + " ".join(str(i) for i in pair.indices)
        )
        lines.append(
            f"labels {bm.labels.size} "
            + " ".join(str(int(v)) for v in bm.labels)
        )
        lines.append(f"alphas {bm.alphas.size} " + _textio.format_row(bm.alphas))
        lines.append(f"bias {fv(bm.bias)}")
        lines.append(f"converged {1 if bm.converged else 0}")
    _textio.write_lines(path, lines)


def _expect_key(reader: _textio.LineReader, key: str) -> list[str]:
    line = reader.next_data_line()
    if line is None:
        reader.fail(f"unexpected end of file, expected '{key}'")
    tokens = line.split()
    if not tokens or tokens[0] != key:
        reader.fail(f"expected '{key}', got {line.strip()!r}")
    return tokens[1:]


def load_model(path: str) -> tuple[MulticlassModel, dict]:
    """Reads the ``save_model`` format; returns the model and its settings."""
    reader = _textio.LineReader(path)
    try:
        n = int(_expect_key(reader, "n")[0])
        classes = tuple(_expect_key(reader, "classes"))
        method = _expect_key(reader, "method")[0]
        meta = {"method": method}
        meta["c"] = float(_expect_key(reader, "c")[0])
        meta["gamma"] = float(_expect_key(reader, "gamma")[0])
        if method == "ssgk":
            meta["rank"] = int(_expect_key(reader, "rank")[0])
            meta["lam"] = float(_expect_key(reader, "lam")[0])
            meta["normalize"] = _expect_key(reader, "normalize")[0] == "1"
        if method == "cc":
            meta["cc_mean"] = _expect_key(reader, "cc_mean")[0] == "1"
        n_pairs = int(_expect_key(reader, "pairs")[0])
        pairwise = []
        for _ in range(n_pairs):
            first, second = _expect_key(reader, "pair")
            idx_tokens = _expect_key(reader, "indices")
            indices = np.array([int(t) for t in idx_tokens[1:]], dtype=np.int64)
            lab_tokens = _expect_key(reader, "labels")
            labels = np.array([float(t) for t in lab_tokens[1:]])
            alpha_tokens = _expect_key(reader, "alphas")
            alphas = np.array([float(t) for t in alpha_tokens[1:]])
            bias = float(_expect_key(reader, "bias")[0])
            converged = _expect_key(reader, "converged")[0] == "1"
            if not (indices.size == labels.size == alphas.size):
                reader.fail("indices, labels, and alphas lengths disagree")
            pairwise.append(
                PairwiseModel(
                    first, second, indices, BinaryModel(alphas, bias, labels, converged)
                )
            )
        _textio.expect_end(reader)
        return MulticlassModel(classes, tuple(pairwise), n), meta
    except (ValueError, IndexError) as exc:
        if isinstance(exc, _textio.DataFileError):
            raise
        reader.fail(f"malformed model file: {exc}")
