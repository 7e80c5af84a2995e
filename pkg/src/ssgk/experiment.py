"""Hyperparameter grid search with stratified cross-validation.

The protocol: for every (rank, lam) cell, factorize the training samples once;
for every (gamma, c), score stratified k-fold cross-validation accuracy on the
training set only. The best row wins by highest mean validation accuracy, with
ties broken toward the simpler model: smaller rank, then lam, then gamma, then
c. A final model is refit on the full training set with the winning settings,
and test accuracy is appended when a test set is supplied.

Baseline feature methods (edge, cc) run the same (gamma, c) protocol over a
plain RBF kernel on their feature vectors.
"""

from __future__ import annotations

import time
from dataclasses import dataclass, field
from typing import Sequence

import numpy as np
from joblib import Parallel, delayed

from .baselines import clustering_coefficients, edge_features
from .core import SymmetricMatrix, symmetric_eig
from .factorization import FactorizationConfig, factorize
from .kernel import RbfParams, build_cross_gram, build_gram, vector_cross_gram, vector_gram
from .svm import SvmConfig, accuracy, predict, train_multiclass

METHODS = ("ssgk", "edge", "cc")


def powers_of_two(lo: int, hi: int) -> tuple[float, ...]:
    return tuple(float(2.0**e) for e in range(lo, hi + 1))


def _sorted_unique(values, kind=float) -> tuple:
    out = tuple(sorted({kind(v) for v in values}))
    if not out:
        raise ValueError("empty grid")
    return out


@dataclass(frozen=True)
class GridSpec:
    """Hyperparameter candidates, stored sorted ascending."""

    c_values: tuple[float, ...] = field(default_factory=lambda: powers_of_two(-8, 8))
    gamma_values: tuple[float, ...] = field(default_factory=lambda: powers_of_two(-8, 8))
    r_values: tuple[int, ...] = field(default_factory=lambda: tuple(range(1, 13)))
    lambda_values: tuple[float, ...] = field(default_factory=lambda: powers_of_two(-2, 8))

    def __post_init__(self):
        object.__setattr__(self, "c_values", _sorted_unique(self.c_values))
        object.__setattr__(self, "gamma_values", _sorted_unique(self.gamma_values))
        object.__setattr__(self, "r_values", _sorted_unique(self.r_values, kind=int))
        object.__setattr__(self, "lambda_values", _sorted_unique(self.lambda_values))
        if any(v <= 0 for v in self.c_values + self.gamma_values + self.lambda_values):
            raise ValueError("grid values must be positive")
        if any(r < 1 for r in self.r_values):
            raise ValueError("ranks must be >= 1")
        if any(lam < 0 for lam in self.lambda_values):
            raise ValueError("lambda values must be >= 0")


@dataclass(frozen=True)
class GridRow:
    """One evaluated configuration; rank and lam are None for baseline methods."""

    rank: int | None
    lam: float | None
    gamma: float
    c: float
    val_accuracy: float


@dataclass(frozen=True, eq=False)
class ExperimentReport:
    method: str
    folds: int
    seed: int
    rows: tuple[GridRow, ...]
    best: GridRow
    test_accuracy: float | None
    wall_time_s: float


def stratified_folds(labels: Sequence[str], k: int, seed: int) -> list[np.ndarray]:
    """Validation index sets for k folds, class-balanced.

    Each class's samples are shuffled by a generator seeded with ``seed`` and
    dealt round-robin, so every fold holds roughly 1/k of every class.
    """
    if k < 2:
        raise ValueError(f"need at least 2 folds, got {k}")
    labs = np.asarray(labels, dtype=object)
    rng = np.random.default_rng(seed)
    folds: list[list[int]] = [[] for _ in range(k)]
    for cls in sorted(set(labs.tolist())):
        idx = np.flatnonzero(labs == cls)
        if idx.size < k:
            raise ValueError(
                f"class {cls!r} has {idx.size} samples, need >= {k} for {k}-fold splits"
            )
        for pos, sample in enumerate(rng.permutation(idx)):
            folds[pos % k].append(int(sample))
    return [np.array(sorted(f), dtype=np.int64) for f in folds]


def _fold_pairs(n: int, folds: list[np.ndarray]) -> list[tuple[np.ndarray, np.ndarray]]:
    everything = np.arange(n)
    return [(np.setdiff1d(everything, va), va) for va in folds]


def _cv_rows(gram, labels, fold_pairs, c_values, seed, rank, lam, gamma):
    """GridRows for every c over one kernel matrix, via k-fold CV."""
    subs = []
    for tr, va in fold_pairs:
        subs.append(
            (
                gram[np.ix_(tr, tr)],
                gram[np.ix_(va, tr)],
                [labels[i] for i in tr],
                [labels[i] for i in va],
            )
        )
    rows = []
    for c in c_values:
        cfg = SvmConfig(c=c, seed=seed)
        accs = [
            accuracy(predict(train_multiclass(k_tr, l_tr, cfg), k_va), l_va)
            for k_tr, k_va, l_tr, l_va in subs
        ]
        rows.append(GridRow(rank, lam, gamma, c, float(np.mean(accs))))
    return rows


def _factor_block(matrices, eigs, rank, lam):
    cfg = FactorizationConfig(rank=rank, lam=lam)
    return [factorize(x, cfg, eig=e).factors for x, e in zip(matrices, eigs)]


def _ssgk_block(matrices, eigs, labels, rank, lam, grid, fold_pairs, seed, normalize):
    factors = _factor_block(matrices, eigs, rank, lam)
    rows = []
    for gamma in grid.gamma_values:
        g = build_gram(factors, RbfParams(gamma), normalize=normalize).values
        rows.extend(
            _cv_rows(g, labels, fold_pairs, grid.c_values, seed, rank, lam, gamma)
        )
    return rows


def _baseline_features(matrices, method: str, cc_mean: bool) -> np.ndarray:
    if method == "edge":
        return np.vstack([edge_features(x) for x in matrices])
    if cc_mean:
        return np.array([[clustering_coefficients(x, mean=True)] for x in matrices])
    return np.vstack([clustering_coefficients(x) for x in matrices])


def _pick_best(rows: Sequence[GridRow]) -> GridRow:
    # rows are generated in ascending (rank, lam, gamma, c) order, so keeping
    # the first strict maximum applies the tie chain.
    best = rows[0]
    for row in rows[1:]:
        if row.val_accuracy > best.val_accuracy:
            best = row
    return best


def grid_search(
    train_matrices: Sequence[SymmetricMatrix],
    train_labels: Sequence[str],
    grid: GridSpec | None = None,
    *,
    method: str = "ssgk",
    folds: int = 3,
    seed: int = 0,
    jobs: int = 1,
    normalize: bool = False,
    cc_mean: bool = False,
    test_matrices: Sequence[SymmetricMatrix] | None = None,
    test_labels: Sequence[str] | None = None,
) -> ExperimentReport:
    """Runs the full protocol and returns the report.

    Parameters
    ----------
    train_matrices, train_labels : aligned training set
    grid : GridSpec, optional
        Candidate values; defaults to the full standard grids.
    method : "ssgk", "edge", or "cc"
        Factor-based graph kernel or a baseline feature extractor.
    folds, seed : cross-validation arity and shuffle/solver seed
    jobs : parallel workers over (rank, lam) cells; output is independent of
        the worker count (results are gathered by cell index)
    normalize : divide kernel entries by sqrt(K_ii K_jj) (ssgk only)
    cc_mean : collapse the cc feature vector to its mean
    test_matrices, test_labels : optional held-out set scored once with the
        winning configuration

    Returns
    -------
    ExperimentReport
    """
    start = time.perf_counter()
    if method not in METHODS:
        raise ValueError(f"unknown method {method!r}; expected one of {METHODS}")
    grid = grid or GridSpec()
    labels = [str(l) for l in train_labels]
    if len(labels) != len(train_matrices):
        raise ValueError(
            f"{len(labels)} labels for {len(train_matrices)} training matrices"
        )
    if (test_matrices is None) != (test_labels is None):
        raise ValueError("test matrices and labels must be supplied together")
    fold_pairs = _fold_pairs(len(labels), stratified_folds(labels, folds, seed))

    if method == "ssgk":
        eigs = [symmetric_eig(x) for x in train_matrices]
        cells = [(r, lam) for r in grid.r_values for lam in grid.lambda_values]
        if jobs == 1:
            blocks = [
                _ssgk_block(
                    train_matrices, eigs, labels, r, lam, grid, fold_pairs, seed, normalize
                )
                for r, lam in cells
            ]
        else:
            blocks = Parallel(n_jobs=jobs)(
                delayed(_ssgk_block)(
                    train_matrices, eigs, labels, r, lam, grid, fold_pairs, seed, normalize
                )
                for r, lam in cells
            )
        rows = [row for block in blocks for row in block]
    else:
        if normalize:
            raise ValueError("normalize applies only to the ssgk method")
        feats = _baseline_features(train_matrices, method, cc_mean)
        rows = []
        for gamma in grid.gamma_values:
            g = vector_gram(feats, RbfParams(gamma)).values
            rows.extend(
                _cv_rows(g, labels, fold_pairs, grid.c_values, seed, None, None, gamma)
            )

    best = _pick_best(rows)
    test_accuracy = None
    if test_matrices is not None:
        svm_cfg = SvmConfig(c=best.c, seed=seed)
        params = RbfParams(best.gamma)
        if method == "ssgk":
            train_factors = _factor_block(train_matrices, eigs, best.rank, best.lam)
            test_factors = [
                factorize(x, FactorizationConfig(rank=best.rank, lam=best.lam)).factors
                for x in test_matrices
            ]
            g = build_gram(train_factors, params, normalize=normalize).values
            cross = build_cross_gram(test_factors, train_factors, params, normalize=normalize)
        else:
            test_feats = _baseline_features(test_matrices, method, cc_mean)
            g = vector_gram(feats, params).values
            cross = vector_cross_gram(test_feats, feats, params)
        model = train_multiclass(g, labels, svm_cfg)
        test_accuracy = accuracy(predict(model, cross), [str(l) for l in test_labels])

    wall = time.perf_counter() - start
    return ExperimentReport(
        method, folds, seed, tuple(rows), best, test_accuracy, wall
    )


def _format_number(v: float) -> str:
    return f"{v:g}"


def _row_cells(row: GridRow) -> list[str]:
    return [
        "-" if row.rank is None else str(row.rank),
        "-" if row.lam is None else _format_number(row.lam),
        _format_number(row.gamma),
        _format_number(row.c),
        f"{row.val_accuracy:.2f}",
    ]


def render_report(report: ExperimentReport) -> str:
    """Plain-text table of all rows plus the best line and test accuracy.

    Wall time is deliberately left out so that report files are reproducible
    byte for byte across runs.
    """
    header = ["rank", "lam", "gamma", "c", "val_acc"]
    table = [header] + [_row_cells(row) for row in report.rows]
    widths = [max(len(r[col]) for r in table) for col in range(len(header))]
    lines = [
        f"method {report.method}",
        f"folds {report.folds}",
        f"seed {report.seed}",
        "",
    ]
    for r in table:
        lines.append("  ".join(cell.rjust(w) for cell, w in zip(r, widths)))
    lines.append("")
    b = _row_cells(report.best)
    lines.append(
        f"best: rank={b[0]} lam={b[1]} gamma={b[2]} c={b[3]} val_acc={b[4]}"
    )
    if report.test_accuracy is not None:
        lines.append(f"test_acc: {report.test_accuracy:.2f}")
    return "\n".join(lines) + "\n"


def report_csv(report: ExperimentReport) -> str:
    """Rows as CSV with empty rank/lam cells for baseline methods."""
    lines = ["rank,lam,gamma,c,val_accuracy"]
    for row in report.rows:
        cells = _row_cells(row)
        lines.append(",".join("" if cell == "-" else cell for cell in cells))
    return "\n".join(lines) + "\n"
