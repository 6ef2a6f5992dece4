"""K-fold cross-validation of the tuning parameter.

Each fold fits on the training-split sample covariance and is scored by the
squared Frobenius distance to the held-out sample covariance. The selected
``lam`` minimises the fold-averaged loss, ties going to the larger ``lam``.
"""

from __future__ import annotations

from concurrent.futures import ThreadPoolExecutor
from dataclasses import dataclass, field

import numpy as np
import numpy.typing as npt

from .matrix import as_data, sample_covariance
from .solver import fit, lambda_grid


@dataclass(frozen=True)
class CvPlan:
    folds: int = 5
    grid: tuple[float, ...] | None = None
    seed: int = 0
    loss: str = "frobenius"
    num: int = 50
    ratio: float = 0.01
    center: bool = True

    def __post_init__(self):
        if self.folds < 2:
            raise ValueError("need at least 2 folds")
        if self.loss != "frobenius":
            raise ValueError(f"unsupported loss {self.loss!r}")
        if self.grid is not None:
            g = np.asarray(self.grid, dtype=float)
            if g.size == 0:
                raise ValueError("empty lambda grid")
            if np.any(g < 0):
                raise ValueError("lambda grid must be nonnegative")
            object.__setattr__(self, "grid", tuple(float(x) for x in np.sort(g)[::-1]))


@dataclass
class CvReport:
    grid: np.ndarray
    fold_losses: np.ndarray  # (folds, len(grid))
    mean_loss: np.ndarray
    se_loss: np.ndarray
    selected_lambda: float
    one_se_lambda: float
    folds: np.ndarray = field(repr=False)  # fold label per observation

    def to_json(self) -> dict:
        return {
            "grid": self.grid.tolist(),
            "fold_losses": self.fold_losses.tolist(),
            "mean_loss": self.mean_loss.tolist(),
            "se_loss": self.se_loss.tolist(),
            "selected_lambda": self.selected_lambda,
            "one_se_lambda": self.one_se_lambda,
        }


def fold_labels(n: int, folds: int, seed: int) -> np.ndarray:
    """Balanced fold labels ``0..folds-1`` in a seeded random order."""
    if n < folds:
        raise ValueError(f"n={n} is smaller than the number of folds ({folds})")
    labels = np.arange(n) % folds
    return np.random.default_rng(seed).permutation(labels)


def cross_validate(
    X: npt.ArrayLike,
    plan: CvPlan = CvPlan(),
    scheme: str = "general",
    threads: int = 1,
) -> CvReport:
    """Pick ``lam`` by K-fold cross-validation.

    With ``plan.grid`` unset, the grid is ``plan.num`` geometric points from
    ``lambda_max`` of the full-data sample covariance down to
    ``plan.ratio * lambda_max``.
    """
    X = as_data(X)
    n = X.shape[0]
    labels = fold_labels(n, plan.folds, plan.seed)
    if plan.grid is None:
        grid = lambda_grid(sample_covariance(X, plan.center), scheme, plan.num, plan.ratio)
    else:
        grid = np.asarray(plan.grid)

    def one_fold(k):
        train, test = X[labels != k], X[labels == k]
        S_tr = sample_covariance(train, plan.center)
        S_te = sample_covariance(test, plan.center)
        return [float(np.sum((fit(S_tr, lam, scheme).sigma_hat - S_te) ** 2)) for lam in grid]

    if threads > 1:
        with ThreadPoolExecutor(threads) as pool:
            rows = list(pool.map(one_fold, range(plan.folds)))
    else:
        rows = [one_fold(k) for k in range(plan.folds)]
    losses = np.array(rows)
    mean = losses.mean(axis=0)
    se = losses.std(axis=0, ddof=1) / np.sqrt(plan.folds)
    # grid is descending, so the first index attaining the minimum is the largest lambda
    best = int(np.flatnonzero(mean == mean.min())[0])
    within = np.flatnonzero(mean <= mean[best] + se[best])
    return CvReport(
        grid=grid,
        fold_losses=losses,
        mean_loss=mean,
        se_loss=se,
        selected_lambda=float(grid[best]),
        one_se_lambda=float(grid[within[0]]),
        folds=labels,
    )
