"""Covariance designs, Gaussian sampling and the Monte-Carlo experiment driver.

Designs
-------
``ma``     moving-average kernel ``1 - |i-j|/K`` for ``|i-j| <= K`` (zero at ``|i-j| = K``).
``cy``     ``0.6 |i-j|**-2 U_ij`` off the diagonal, ``U_ij = U_ji ~ Uniform(0, 1)``, unit diagonal.
``spiked`` ``0.8 * 1{|i-j| <= K} + c * 1{i = j}`` with ``c`` chosen so ``lambda_min = 0.1``.
``custom`` a user-supplied matrix.
"""

from __future__ import annotations

import time
from concurrent.futures import ThreadPoolExecutor
from dataclasses import dataclass, field

import numpy as np
from scipy import linalg

from .matrix import as_symmetric, operator_dist, sample_covariance
from .solver import fit, fixed_band

PSD_TOL = -1e-10
JITTER = 1e-10


@dataclass(frozen=True)
class CovModel:
    kind: str
    p: int
    K: int | None = None
    seed: int = 0
    matrix: np.ndarray | None = field(default=None, repr=False, compare=False)

    def __post_init__(self):
        if self.kind not in ("ma", "cy", "spiked", "custom"):
            raise ValueError(f"unknown covariance model {self.kind!r}")
        if self.p < 1:
            raise ValueError("p must be >= 1")
        if self.kind in ("ma", "spiked"):
            if self.K is None or not 1 <= self.K <= max(self.p - 1, 1):
                raise ValueError(f"{self.kind} needs 1 <= K <= p-1, got K={self.K}")
        if self.kind == "custom" and self.matrix is None:
            raise ValueError("custom model needs a matrix")


def _dist(p: int) -> np.ndarray:
    i = np.arange(p)
    return np.abs(i[:, None] - i[None, :])


def ma_cov(p: int, K: int) -> np.ndarray:
    return np.maximum(1.0 - _dist(p) / K, 0.0)


def cy_cov(p: int, seed: int = 0) -> tuple[np.ndarray, int]:
    """CY design; redraws with ``seed + 1, seed + 2, ...`` until PSD. Returns ``(Sigma, redraws)``."""
    d = _dist(p).astype(float)
    redraws = 0
    while True:
        rng = np.random.default_rng(seed + redraws)
        U = np.triu(rng.uniform(size=(p, p)), 1)
        U = U + U.T
        with np.errstate(divide="ignore", invalid="ignore"):
            Sigma = np.where(d > 0, 0.6 * U / d**2, 1.0)
        if np.linalg.eigvalsh(Sigma)[0] >= PSD_TOL:
            return Sigma, redraws
        redraws += 1


def spiked_cov(p: int, K: int, floor: float = 0.1) -> np.ndarray:
    """``0.8 * band(K) + c I`` with ``c`` set so the smallest eigenvalue equals ``floor``.

    Shifting the diagonal moves every eigenvalue by ``c``, so ``c`` is exact
    from one symmetric eigensolve.
    """
    B = 0.8 * (_dist(p) <= K)
    c = floor - float(np.linalg.eigvalsh(B)[0])
    return B + c * np.eye(p)


def make_cov(model: CovModel) -> np.ndarray:
    if model.kind == "ma":
        return ma_cov(model.p, model.K)
    if model.kind == "cy":
        return cy_cov(model.p, model.seed)[0]
    if model.kind == "spiked":
        return spiked_cov(model.p, model.K)
    return as_symmetric(model.matrix, name="custom covariance")


def _factor(Sigma: np.ndarray) -> np.ndarray:
    try:
        return linalg.cholesky(Sigma, lower=True)
    except linalg.LinAlgError:
        pass
    try:
        return linalg.cholesky(Sigma + JITTER * np.eye(Sigma.shape[0]), lower=True)
    except linalg.LinAlgError:
        pass
    # semidefinite: symmetric square root from the eigendecomposition
    d, U = np.linalg.eigh(Sigma)
    if d[0] < PSD_TOL:
        raise ValueError(f"covariance is indefinite (min eigenvalue {d[0]:.3g})")
    return U * np.sqrt(np.maximum(d, 0.0))


def sample_gaussian(Sigma: np.ndarray, n: int, seed: int | np.random.Generator) -> np.ndarray:
    """``n`` rows drawn i.i.d. from ``N(0, Sigma)``."""
    Sigma = as_symmetric(Sigma, name="Sigma")
    if n < 1:
        raise ValueError("n must be >= 1")
    L = _factor(Sigma)
    rng = seed if isinstance(seed, np.random.Generator) else np.random.default_rng(seed)
    Z = rng.standard_normal((n, Sigma.shape[0]))
    return Z @ L.T


def theory_lambda(p: int, n: int, x: float = 2.0) -> float:
    """``x * sqrt(log(p) / n)``; ``x = 2`` is the simulation default."""
    return float(x * np.sqrt(np.log(p) / n))


@dataclass
class SimReport:
    """Monte-Carlo losses per estimator.

    ``records`` holds one dict per (replicate, estimator) with keys
    ``rep, estimator, frob2_over_p, op, k_hat, lam, seconds``.
    """

    config: dict
    records: list[dict]
    summary: dict

    def to_json(self, timing: bool = False) -> dict:
        """JSON-ready dict; wall-clock fields are dropped unless ``timing`` so reruns compare equal."""
        recs = self.records if timing else [{k: v for k, v in r.items() if k != "seconds"} for r in self.records]
        return {"config": self.config, "summary": self.summary, "records": recs}


ESTIMATORS = ("general", "simple", "group", "band_oracle", "sample")


def _losses(est, Sigma):
    p = Sigma.shape[0]
    return float(np.sum((est - Sigma) ** 2) / p), operator_dist(est, Sigma)


def _replicate(rep, Sigma, n, estimators, lam_rule, seed, cv_kw):
    # per-replicate stream from a spawned SeedSequence: order-independent
    ss = np.random.SeedSequence(seed).spawn(rep + 1)[rep]
    X = sample_gaussian(Sigma, n, np.random.default_rng(ss))
    S = sample_covariance(X)
    p = Sigma.shape[0]
    out = []
    for name in estimators:
        t0 = time.perf_counter()
        lam = None
        k_hat = None
        if name == "sample":
            est = S
        elif name == "band_oracle":
            best = None
            for K in range(p):
                cand = fixed_band(S, K)
                loss = np.sum((cand - Sigma) ** 2)
                if best is None or loss < best[0]:
                    best = (loss, K, cand)
            _, k_hat, est = best
        else:
            lam = _resolve_lambda(lam_rule, X, S, name, p, n, cv_kw, ss)
            res = fit(S, lam, name)
            est, k_hat = res.sigma_hat, res.k_hat
        secs = time.perf_counter() - t0
        f2, op = _losses(est, Sigma)
        out.append(
            {
                "rep": rep,
                "estimator": name,
                "frob2_over_p": f2,
                "op": op,
                "k_hat": k_hat,
                "lam": lam,
                "seconds": secs,
            }
        )
    return out


def _resolve_lambda(rule, X, S, scheme, p, n, cv_kw, ss):
    if isinstance(rule, (int, float)):
        return float(rule)
    if rule == "theory":
        return theory_lambda(p, n)
    if rule == "cv":
        from .model_select import CvPlan, cross_validate

        plan = CvPlan(seed=int(ss.generate_state(1)[0]), **cv_kw)
        return cross_validate(X, plan, scheme).selected_lambda
    raise ValueError(f"unknown lambda rule {rule!r}")


def run_experiment(
    model: CovModel,
    n: int,
    reps: int,
    estimators=("general",),
    lam_rule="theory",
    seed: int = 0,
    threads: int = 1,
    cv_kw: dict | None = None,
) -> SimReport:
    """Monte-Carlo comparison of estimators on one covariance design.

    Parameters
    ----------
    model : CovModel
    n : int
        Sample size per replicate.
    reps : int
    estimators : sequence of str
        Any of ``general``, ``simple``, ``group`` (convex banding with that
        scheme), ``band_oracle`` (fixed banding at the bandwidth minimising the
        Frobenius loss against the truth) and ``sample``.
    lam_rule : float or {"theory", "cv"}
        Fixed value, ``2 sqrt(log p / n)``, or cross-validation.
    seed : int
    threads : int
        Replicates run concurrently; results are identical for any value.
    """
    if reps < 1:
        raise ValueError("reps must be >= 1")
    for e in estimators:
        if e not in ESTIMATORS:
            raise ValueError(f"unknown estimator {e!r}")
    Sigma = make_cov(model)
    cv_kw = dict(cv_kw or {})

    def job(rep):
        try:
            return _replicate(rep, Sigma, n, tuple(estimators), lam_rule, seed, cv_kw)
        except Exception as exc:
            raise RuntimeError(f"replicate {rep} failed: {exc}") from exc

    if threads > 1:
        with ThreadPoolExecutor(threads) as pool:
            chunks = list(pool.map(job, range(reps)))
    else:
        chunks = [job(r) for r in range(reps)]
    records = [rec for chunk in chunks for rec in chunk]

    summary = {}
    for name in estimators:
        rows = [r for r in records if r["estimator"] == name]
        f2 = np.array([r["frob2_over_p"] for r in rows])
        op = np.array([r["op"] for r in rows])
        se = (lambda a: float(a.std(ddof=1) / np.sqrt(a.size)) if a.size > 1 else 0.0)
        ks = [r["k_hat"] for r in rows if r["k_hat"] is not None]
        summary[name] = {
            "frob2_over_p_mean": float(f2.mean()),
            "frob2_over_p_se": se(f2),
            "op_mean": float(op.mean()),
            "op_se": se(op),
            "k_hat_counts": {str(k): ks.count(k) for k in sorted(set(ks))},
        }
    config = {
        "model": model.kind,
        "p": model.p,
        "K": model.K,
        "model_seed": model.seed,
        "n": n,
        "reps": reps,
        "estimators": list(estimators),
        "lambda_rule": lam_rule,
        "seed": seed,
    }
    return SimReport(config=config, records=records, summary=summary)
