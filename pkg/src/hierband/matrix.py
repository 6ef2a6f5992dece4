"""Subdiagonal geometry, sample covariance and norms for symmetric matrices.

Subdiagonals are counted from the outside in: level ``m`` (1-based) holds the
entries with ``|j - k| = p - m``, so level 1 is the corner pair
``(1, p), (p, 1)`` and level ``p`` is the main diagonal. Every routine that
reports a norm over a subdiagonal counts both mirrored copies, giving ``2m``
entries for ``m < p``.

Symmetric matrices are plain ``numpy.ndarray`` objects; :func:`as_symmetric`
validates them at API boundaries.
"""

from __future__ import annotations

import numpy as np
import numpy.typing as npt

EIGH_MAX_DIM = 512
POWER_TOL = 1e-10
POWER_MAX_ITER = 10_000


def as_symmetric(M: npt.ArrayLike, *, atol: float = 1e-12, name: str = "matrix") -> np.ndarray:
    """Return ``M`` as a float array after checking it is square, finite and symmetric."""
    A = np.asarray(M, dtype=float)
    if A.ndim != 2 or A.shape[0] != A.shape[1] or A.shape[0] < 1:
        raise ValueError(f"{name} must be a non-empty square matrix, got shape {A.shape}")
    if not np.all(np.isfinite(A)):
        raise ValueError(f"{name} has non-finite entries")
    scale = max(1.0, float(np.max(np.abs(A))))
    if np.max(np.abs(A - A.T)) > atol * scale:
        raise ValueError(f"{name} is not symmetric")
    return A


def as_data(X: npt.ArrayLike) -> np.ndarray:
    """Validate an ``n x p`` data matrix of finite observations."""
    A = np.asarray(X, dtype=float)
    if A.ndim == 1:
        A = A[np.newaxis, :]
    if A.ndim != 2:
        raise ValueError(f"data must be 2-d, got shape {A.shape}")
    n, p = A.shape
    if n < 1:
        raise ValueError("data matrix has no rows")
    if p < 1:
        raise ValueError("data matrix has no columns")
    if not np.all(np.isfinite(A)):
        raise ValueError("data matrix has non-finite entries")
    return A


def _check_level(p: int, m: int) -> None:
    if not 1 <= m <= p:
        raise ValueError(f"level m={m} out of range 1..{p}")


def subdiag_indices(p: int, m: int) -> list[tuple[int, int]]:
    """1-based index pairs of subdiagonal level ``m`` in row-major order.

    >>> subdiag_indices(4, 2)
    [(1, 3), (2, 4), (3, 1), (4, 2)]
    """
    _check_level(p, m)
    d = p - m
    pairs = [(j, j + d) for j in range(1, p - d + 1)]
    if d > 0:
        pairs += [(j + d, j) for j in range(1, p - d + 1)]
    return sorted(pairs)


def subdiag_values(M: np.ndarray, m: int) -> np.ndarray:
    """Entries of ``M`` on level ``m``, upper copy first then lower copy."""
    p = M.shape[0]
    _check_level(p, m)
    d = p - m
    if d == 0:
        return np.diagonal(M).copy()
    return np.concatenate([np.diagonal(M, d), np.diagonal(M, -d)])


def subdiag_norm(M: npt.ArrayLike, m: int) -> float:
    """Euclidean norm of ``M`` restricted to level ``m`` (both mirrored copies)."""
    A = np.asarray(M, dtype=float)
    return float(np.linalg.norm(subdiag_values(A, m)))


def subdiag_norms(M: np.ndarray) -> np.ndarray:
    """Norms of all off-diagonal levels; entry ``m - 1`` is level ``m`` for ``m = 1..p-1``.

    Assumes ``M`` symmetric, so each norm is ``sqrt(2)`` times that of one copy.
    """
    p = M.shape[0]
    out = np.empty(p - 1)
    for m in range(1, p):
        out[m - 1] = np.sqrt(2.0) * np.linalg.norm(np.diagonal(M, p - m))
    return out


def apply_taper(S: np.ndarray, taper: np.ndarray) -> np.ndarray:
    """Schur product of ``S`` with the Toeplitz matrix whose level ``m`` equals ``taper[m-1]``.

    The diagonal is copied unchanged.
    """
    p = S.shape[0]
    taper = np.asarray(taper, dtype=float)
    if taper.shape != (p - 1,):
        raise ValueError(f"taper must have length p-1={p - 1}, got {taper.shape}")
    idx = np.arange(p)
    dist = np.abs(idx[:, None] - idx[None, :])
    # level m sits at distance p - m, so distance d maps to taper[p - d - 1]
    full = np.ones(p)
    full[1:] = taper[::-1]
    return S * full[dist]


def sample_covariance(X: npt.ArrayLike, center: bool = True) -> np.ndarray:
    """Sample covariance with ``1/n`` normalisation.

    Parameters
    ----------
    X : array-like of shape (n, p)
        One observation per row.
    center : bool, default=True
        Subtract the column means first. With ``center=False`` the result is the
        raw second-moment matrix, matching a known zero mean.

    Returns
    -------
    ndarray of shape (p, p)
    """
    A = as_data(X)
    n = A.shape[0]
    if center:
        A = A - A.mean(axis=0)
    S = A.T @ A / n
    return (S + S.T) / 2.0


def _level_weights_ll(W) -> np.ndarray:
    p = W.p
    return np.array([W.weight(ell, ell) for ell in range(1, p)])


def norm_21(M: npt.ArrayLike, W) -> float:
    """Weighted sum of off-diagonal level norms, ``sum_l w_l * ||M_{s_l}||``."""
    A = np.asarray(M, dtype=float)
    if A.shape[0] < 2:
        return 0.0
    return float(np.sum(_level_weights_ll(W) * subdiag_norms(A)))


def norm_2inf(M: npt.ArrayLike, W) -> float:
    """Dual of :func:`norm_21`: ``max_l ||M_{s_l}|| / w_l``."""
    A = np.asarray(M, dtype=float)
    if A.shape[0] < 2:
        return 0.0
    return float(np.max(subdiag_norms(A) / _level_weights_ll(W)))


def offdiag_inner(A: np.ndarray, B: np.ndarray) -> float:
    """Inner product restricted to off-diagonal entries."""
    return float(np.sum(A * B) - np.sum(np.diagonal(A) * np.diagonal(B)))


def frobenius_dist(A: npt.ArrayLike, B: npt.ArrayLike) -> float:
    A, B = np.asarray(A, dtype=float), np.asarray(B, dtype=float)
    if A.shape != B.shape:
        raise ValueError(f"dimension mismatch: {A.shape} vs {B.shape}")
    return float(np.linalg.norm(A - B))


def operator_norm(M: np.ndarray) -> float:
    """Largest absolute eigenvalue of a symmetric matrix.

    Dense symmetric eigensolver up to ``EIGH_MAX_DIM``, power iteration above.
    """
    p = M.shape[0]
    if p <= EIGH_MAX_DIM:
        return float(np.max(np.abs(np.linalg.eigvalsh(M))))
    rng = np.random.default_rng(0)
    v = rng.standard_normal(p)
    v /= np.linalg.norm(v)
    est = 0.0
    for _ in range(POWER_MAX_ITER):
        # iterate on M^2 so that +/- eigenvalues of equal size do not oscillate
        w = M @ (M @ v)
        nrm = np.linalg.norm(w)
        if nrm == 0.0:
            return 0.0
        v = w / nrm
        new = np.sqrt(nrm)
        if abs(new - est) <= POWER_TOL * max(new, 1.0):
            return float(new)
        est = new
    return float(est)


def operator_dist(A: npt.ArrayLike, B: npt.ArrayLike) -> float:
    A, B = np.asarray(A, dtype=float), np.asarray(B, dtype=float)
    if A.shape != B.shape:
        raise ValueError(f"dimension mismatch: {A.shape} vs {B.shape}")
    D = A - B
    return operator_norm((D + D.T) / 2.0)


def bandwidth(M: npt.ArrayLike, tol: float = 0.0) -> int:
    """Largest ``|j - k|`` with ``|M[j, k]| > tol`` (0 for a diagonal matrix)."""
    M = np.asarray(M)
    j, k = np.nonzero(np.abs(M) > tol)
    return int(np.max(np.abs(j - k))) if j.size else 0
