"""Gaussian discriminant analysis with convex-banded class covariances.

QDA uses one banded covariance per class. LDA pools them as

    S_w = sum_k (n_k - 1) Sigma_hat_k / (n - K),

the usual pooled within-class estimate with each class covariance replaced
by its banded version. Priors are empirical class frequencies.
"""

from __future__ import annotations

from dataclasses import dataclass

import numpy as np
import numpy.typing as npt
from scipy import linalg

from .matrix import as_data, sample_covariance
from .model_select import CvPlan, cross_validate
from .psd import fit_psd
from .solver import fit
from .simlab import ma_cov, sample_gaussian


@dataclass
class GaussianClassModel:
    classes: np.ndarray
    means: np.ndarray  # (n_classes, p)
    covariances: np.ndarray  # (n_classes, p, p); identical slices for LDA
    priors: np.ndarray
    mode: str
    lambdas: np.ndarray
    chol: list  # lower Cholesky factors

    @property
    def p(self) -> int:
        return self.means.shape[1]


def _chol_or_floor(Sigma, S, lam, scheme):
    try:
        return Sigma, linalg.cholesky(Sigma, lower=True)
    except linalg.LinAlgError:
        pass
    res = fit_psd(S, lam, scheme=scheme)
    Sigma = res.sigma_tilde
    return Sigma, linalg.cholesky(Sigma, lower=True)


def _class_cov(Xk, lam, scheme, ddof):
    n_k = Xk.shape[0]
    S = sample_covariance(Xk)
    if ddof:
        S = S * n_k / (n_k - ddof)
    return S, (S if lam is None else fit(S, lam, scheme).sigma_hat)


def train(
    X: npt.ArrayLike,
    y: npt.ArrayLike,
    mode: str = "qda",
    lam: float | npt.ArrayLike | None = None,
    cv: CvPlan | None = None,
    scheme: str = "general",
    threads: int = 1,
) -> GaussianClassModel:
    """Fit class means, priors and banded class covariances.

    Parameters
    ----------
    X : array-like of shape (n, p)
    y : array-like of shape (n,)
    mode : {"qda", "lda"}
    lam : float or array, optional
        Tuning parameter, shared or one per class (in sorted class order).
        ``None`` with ``cv=None`` uses the unregularised sample covariances.
    cv : CvPlan, optional
        Select each class's ``lam`` independently by cross-validation on that
        class's observations.
    scheme : str, default="general"
    threads : int, default=1
        Worker threads for the cross-validation folds.
    """
    X = as_data(X)
    y = np.asarray(y)
    if y.shape != (X.shape[0],):
        raise ValueError("labels must be a vector with one entry per row of X")
    if mode not in ("qda", "lda"):
        raise ValueError(f"mode must be 'qda' or 'lda', got {mode!r}")
    classes, counts = np.unique(y, return_counts=True)
    if classes.size < 2:
        raise ValueError("need at least two classes")
    if np.any(counts < 2):
        raise ValueError("every class needs at least two observations")
    nc = classes.size
    if cv is not None:
        lams = np.array([cross_validate(X[y == c], cv, scheme, threads).selected_lambda for c in classes])
    elif lam is None:
        lams = np.full(nc, np.nan)
    else:
        lams = np.broadcast_to(np.asarray(lam, dtype=float), (nc,)).copy()

    means = np.array([X[y == c].mean(axis=0) for c in classes])
    priors = counts / counts.sum()
    p = X.shape[1]
    covs = np.empty((nc, p, p))
    chol = []
    if mode == "qda":
        for i, c in enumerate(classes):
            lam_i = None if np.isnan(lams[i]) else lams[i]
            S, Sig = _class_cov(X[y == c], lam_i, scheme, ddof=0)
            Sig, L = _chol_or_floor(Sig, S, 0.0 if lam_i is None else lam_i, scheme)
            covs[i] = Sig
            chol.append(L)
    else:
        # pooled estimate uses the unbiased per-class covariances
        pooled = np.zeros((p, p))
        S_pool = np.zeros((p, p))
        for i, c in enumerate(classes):
            lam_i = None if np.isnan(lams[i]) else lams[i]
            S, Sig = _class_cov(X[y == c], lam_i, scheme, ddof=1)
            pooled += (counts[i] - 1) * Sig
            S_pool += (counts[i] - 1) * S
        denom = counts.sum() - nc
        pooled /= denom
        S_pool /= denom
        lam_f = float(np.nanmean(lams)) if not np.all(np.isnan(lams)) else 0.0
        pooled, L = _chol_or_floor(pooled, S_pool, lam_f, scheme)
        covs[:] = pooled
        chol = [L] * nc
    return GaussianClassModel(classes, means, covs, priors, mode, lams, chol)


def log_posteriors(model: GaussianClassModel, X: npt.ArrayLike) -> np.ndarray:
    """Unnormalised log posterior ``log pi_k + log N(x; mu_k, Sigma_k)`` per class.

    Returns shape ``(n, n_classes)``; a log-softmax over columns gives the
    posterior class probabilities.
    """
    X = as_data(X)
    if X.shape[1] != model.p:
        raise ValueError(f"expected {model.p} features, got {X.shape[1]}")
    out = np.empty((X.shape[0], model.classes.size))
    for i, L in enumerate(model.chol):
        Z = linalg.solve_triangular(L, (X - model.means[i]).T, lower=True)
        logdet = 2.0 * np.sum(np.log(np.diagonal(L)))
        out[:, i] = (
            np.log(model.priors[i])
            - 0.5 * np.sum(Z**2, axis=0)
            - 0.5 * logdet
            - 0.5 * model.p * np.log(2 * np.pi)
        )
    return out


def posterior_proba(model: GaussianClassModel, X: npt.ArrayLike) -> np.ndarray:
    scores = log_posteriors(model, X)
    scores -= scores.max(axis=1, keepdims=True)
    e = np.exp(scores)
    return e / e.sum(axis=1, keepdims=True)


def predict(model: GaussianClassModel, X: npt.ArrayLike) -> np.ndarray:
    """Most probable class; ties go to the class listed first."""
    return model.classes[np.argmax(log_posteriors(model, X), axis=1)]


def synthetic_two_class(
    n_per_class: int = 300,
    p: int = 100,
    K: int = 5,
    shift: float = 0.5,
    n_shift: int = 20,
    seed: int = 0,
):
    """Two Gaussian classes with MA(K) covariance and a mean shift on the first coordinates.

    Stands in for ordered-feature data such as log-periodograms. Returns ``(X, y)``
    with classes ``0`` and ``1``, rows shuffled.
    """
    rng = np.random.default_rng(seed)
    Sigma = ma_cov(p, K)
    mu = np.zeros(p)
    mu[:n_shift] = shift
    X0 = sample_gaussian(Sigma, n_per_class, rng)
    X1 = sample_gaussian(Sigma, n_per_class, rng) + mu
    X = np.vstack([X0, X1])
    y = np.repeat([0, 1], n_per_class)
    order = rng.permutation(2 * n_per_class)
    return X[order], y[order]
