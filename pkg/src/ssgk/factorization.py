"""Sparse symmetric rank-one factorization.

Minimizes ``||X - A A^T||_F^2 + lam * sum_r ||a_r||_1`` over the I x R factor
matrix A by proximal gradient descent with backtracking line search, starting
from a truncated eigendecomposition.
"""

from __future__ import annotations

import warnings
from dataclasses import dataclass

import numpy as np

from .core import EigenDecomposition, FactorSet, SymmetricMatrix, symmetric_eig

# Step sizes below this are treated as line-search failure.
MIN_STEP = 1e-18


@dataclass(frozen=True)
class FactorizationConfig:
    """Solver settings; ``rank`` and ``lam`` are the model hyperparameters.

    ``restarts`` extra solver runs from seeded random starting points guard
    against the spectral start's basin being a poor local minimum of the
    penalized (nonconvex) objective; they are skipped when ``lam`` is zero,
    where the spectral start is already the global optimum.
    """

    rank: int
    lam: float = 0.0
    max_iters: int = 2000
    rel_tol: float = 1e-9
    backtrack_shrink: float = 0.5
    initial_step: float = 1.0
    restarts: int = 8
    seed: int = 0

    def __post_init__(self):
        if self.rank < 1:
            raise ValueError(f"rank must be >= 1, got {self.rank}")
        if not (self.lam >= 0.0 and np.isfinite(self.lam)):
            raise ValueError(f"lam must be finite and >= 0, got {self.lam}")
        if self.max_iters < 1:
            raise ValueError(f"max_iters must be >= 1, got {self.max_iters}")
        if not (0.0 < self.rel_tol < 1.0):
            raise ValueError(f"rel_tol must be in (0, 1), got {self.rel_tol}")
        if not (0.0 < self.backtrack_shrink < 1.0):
            raise ValueError(
                f"backtrack_shrink must be in (0, 1), got {self.backtrack_shrink}"
            )
        if not (self.initial_step > 0.0 and np.isfinite(self.initial_step)):
            raise ValueError(f"initial_step must be finite and > 0, got {self.initial_step}")
        if self.restarts < 0:
            raise ValueError(f"restarts must be >= 0, got {self.restarts}")


@dataclass(frozen=True, eq=False)
class FactorizationResult:
    """Canonicalized factors plus the objective trace of accepted iterates."""

    factors: FactorSet
    objective_trace: tuple[float, ...]
    converged: bool
    iterations: int


def objective(x: SymmetricMatrix, factors: FactorSet, lam: float) -> float:
    """``||X - A A^T||_F^2 + lam * sum |A|``."""
    if factors.dim != x.dim:
        raise ValueError(f"factor dimension {factors.dim} != matrix dimension {x.dim}")
    if not (lam >= 0.0):
        raise ValueError(f"lam must be >= 0, got {lam}")
    return _objective(x.values, factors.vectors.T, lam)


def _objective(xv: np.ndarray, a: np.ndarray, lam: float) -> float:
    d = a @ a.T - xv
    return float(np.sum(d * d) + lam * np.abs(a).sum())


def smooth_gradient(x: SymmetricMatrix, a: np.ndarray) -> np.ndarray:
    """Gradient of ``||X - A A^T||_F^2`` w.r.t. A: ``4 (A A^T - X) A``."""
    a = np.asarray(a, dtype=np.float64)
    if a.ndim != 2 or a.shape[0] != x.dim:
        raise ValueError(f"expected an ({x.dim}, R) factor matrix, got shape {a.shape}")
    return 4.0 * ((a @ a.T - x.values) @ a)


def soft_threshold(a: np.ndarray, t: float) -> np.ndarray:
    """Elementwise ``sign(a) * max(|a| - t, 0)``; the prox of ``t * ||.||_1``."""
    if t < 0:
        raise ValueError(f"threshold must be >= 0, got {t}")
    a = np.asarray(a, dtype=np.float64)
    return np.sign(a) * np.maximum(np.abs(a) - t, 0.0)


def canonicalize_signs(factors: FactorSet) -> FactorSet:
    """Flips each factor so its largest-|.| entry (lowest index on ties) is >= 0.

    Negation is exact in floating point, so the reconstruction A A^T is
    unchanged bit for bit.
    """
    v = np.array(factors.vectors)
    for r in range(v.shape[0]):
        if v[r, np.argmax(np.abs(v[r]))] < 0:
            v[r] = -v[r]
    return FactorSet(v, canonical_sign=True)


def eigen_init(
    x: SymmetricMatrix, rank: int, eig: EigenDecomposition | None = None
) -> FactorSet:
    """Spectral starting point: ``a_r = sqrt(max(lambda_r, 0)) * v_r``.

    Uses the ``rank`` leading eigenpairs; pass a precomputed ``eig`` to avoid
    repeating the decomposition when factorizing one matrix at many settings.
    """
    if not (1 <= rank <= x.dim):
        raise ValueError(f"rank must be in [1, {x.dim}], got {rank}")
    if eig is None:
        eig = symmetric_eig(x)
    w = eig.eigenvalues[:rank]
    v = eig.eigenvectors[:, :rank]
    vectors = (np.sqrt(np.maximum(w, 0.0)) * v).T
    return canonicalize_signs(FactorSet(vectors))


def _ista(
    xv: np.ndarray, a0: np.ndarray, config: FactorizationConfig
) -> tuple[np.ndarray, list[float], bool, int]:
    """One monotone accelerated proximal gradient run.

    Each iteration takes a gradient step on the smooth term from the
    momentum point, applies the soft-threshold prox, and halves the step
    until the local quadratic bound holds. A candidate that would raise the
    objective resets the momentum instead of being taken, so the returned
    trace is non-increasing; the plain step after a reset always makes
    progress or certifies a stationary point.
    """
    a = a0.copy()
    obj = _objective(xv, a, config.lam)
    trace = [obj]

    prev = a
    momentum = 1.0
    step = config.initial_step
    converged = False
    iterations = 0
    small_streak = 0
    while iterations < config.max_iters:
        next_momentum = 0.5 * (1.0 + np.sqrt(1.0 + 4.0 * momentum * momentum))
        beta = (momentum - 1.0) / next_momentum
        y = a + beta * (a - prev)
        ydiff = y @ y.T - xv
        ysmooth = float(np.sum(ydiff * ydiff))
        grad = 4.0 * (ydiff @ y)
        halved = False
        while True:
            cand = soft_threshold(y - step * grad, step * config.lam)
            cand_diff = cand @ cand.T - xv
            cand_smooth = float(np.sum(cand_diff * cand_diff))
            # The step must satisfy the quadratic upper bound at y, not
            # merely shrink the objective: an oversized step can otherwise
            # leap into a far, worse basin while still looking like progress.
            delta = cand - y
            bound = (
                ysmooth
                + float(np.sum(grad * delta))
                + float(np.sum(delta * delta)) / (2.0 * step)
            )
            if cand_smooth <= bound + 1e-12 * max(1.0, abs(bound)):
                break
            step *= config.backtrack_shrink
            halved = True
            if step < MIN_STEP:
                break
        if step < MIN_STEP:
            made_progress = "after" if iterations else "before any"
            warnings.warn(
                f"line search step underflowed {made_progress} progress; "
                "returning the current iterate",
                stacklevel=3,
            )
            break

        cand_obj = cand_smooth + config.lam * np.abs(cand).sum()
        if cand_obj > obj:
            if momentum > 1.0:
                # Momentum overshot; restart it and redo the step from a.
                prev = a
                momentum = 1.0
                continue
            # A plain step (y == a) can only raise the objective by rounding
            # dust, which certifies a stationary point; record a no-op step
            # so the streak logic terminates.
            cand, cand_obj = a, obj

        iterations += 1
        rel_decrease = (obj - cand_obj) / max(1.0, obj)
        prev, a, obj = a, cand, cand_obj
        momentum = next_momentum
        trace.append(obj)
        if rel_decrease < config.rel_tol:
            small_streak += 1
            if small_streak >= 2:
                converged = True
                break
        else:
            small_streak = 0
        if not halved:
            # Probe a larger step only after a first-try acceptance, so the
            # line search is not re-halving the same growth every iteration.
            step = min(step / config.backtrack_shrink, config.initial_step)
    return a, trace, converged, iterations


def factorize(
    x: SymmetricMatrix,
    config: FactorizationConfig,
    eig: EigenDecomposition | None = None,
) -> FactorizationResult:
    """Runs the proximal gradient solver.

    Each iteration takes a gradient step on the smooth term, applies the
    soft-threshold prox, and backtracks the step until the local quadratic
    bound holds and the objective does not increase, so the trace is
    non-increasing. A run converges after two consecutive accepted steps
    whose relative decrease falls below ``rel_tol``; hitting ``max_iters``
    first returns that run's last iterate flagged as non-converged.

    The first run starts from the clamped spectral point. When ``lam`` is
    positive, ``config.restarts`` further runs start from seeded random
    points and the run with the lowest final objective wins (earliest run on
    exact ties), since the penalized objective has multiple basins and the
    spectral one is not always best. Deterministic for fixed inputs.

    Parameters
    ----------
    x : SymmetricMatrix
        Matrix to factor.
    config : FactorizationConfig
        Rank, penalty, and solver settings.
    eig : EigenDecomposition, optional
        Precomputed decomposition of ``x`` for the starting point.

    Returns
    -------
    FactorizationResult
        Sign-canonicalized factors, objective trace, convergence flag, and
        iteration count of the winning run.
    """
    xv = x.values
    if not xv.any():
        # A zero matrix is fixed by the zero factor set at objective zero.
        factors = FactorSet(np.zeros((config.rank, x.dim)), canonical_sign=True)
        return FactorizationResult(factors, (0.0,), True, 0)

    starts = [eigen_init(x, config.rank, eig).vectors.T]
    if config.lam > 0.0 and config.restarts > 0:
        rng = np.random.default_rng(config.seed)
        # Entries of a minimizer scale like sqrt(|X|_F / I).
        scale = np.sqrt(np.linalg.norm(xv) / x.dim)
        for _ in range(config.restarts):
            starts.append(scale * rng.standard_normal((x.dim, config.rank)))

    best = None
    for a0 in starts:
        run = _ista(xv, a0, config)
        if best is None or run[1][-1] < best[1][-1]:
            best = run
    a, trace, converged, iterations = best
    factors = canonicalize_signs(FactorSet(a.T))
    return FactorizationResult(factors, tuple(trace), converged, iterations)
