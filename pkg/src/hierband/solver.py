"""Convex banding: the hierarchical group-lasso prox of a sample covariance.

The estimator minimises ``0.5 * ||Sigma - S||_F**2 + lam * pen(Sigma)`` with

    pen(Sigma) = sum_{l=1}^{p-1} sqrt(sum_{m<=l} w[l,m]**2 * ||Sigma_{s_m}||**2).

It is computed by block coordinate descent on the dual, sweeping levels
``l = 1..p-1``. Each block update is a projection onto an ellipsoid, reduced
to a scalar root ``nu_l`` of

    h_l(nu) = sum_{m<=l} w[l,m]**2 * r_m**2 / (w[l,m]**2 + nu)**2 = lam**2,

after which every residual subdiagonal ``m <= l`` is rescaled by
``[nu_l]_+ / (w[l,m]**2 + [nu_l]_+)``. Since updates only ever rescale
subdiagonals, the residual is tracked as one scale factor per subdiagonal and
the estimate is a Toeplitz taper applied to ``S``.

For the ``group`` and ``simple`` schemes one sweep is exact. When weights vary
within a level (``general``) the first sweep can stop short of the optimum, so
further warm-started sweeps run until the duality gap certifies the result.
"""

from __future__ import annotations

import math
from dataclasses import dataclass, field

import numpy as np
import numpy.typing as npt
from scipy import linalg

from . import _kernels
from .matrix import apply_taper, as_symmetric, subdiag_norms
from .weights import WeightScheme

ROOT_TOL = 1e-12
ZERO_TOL = 1e-14
GAP_TOL = 1e-11
MAX_SWEEPS = 10_000
# lam below this fraction of the largest subdiagonal norm is treated as zero
LAM_FLOOR = 1e-150
POLISH_AFTER = 50
_MAX_ROOT_ITER = 200


class NumericalError(RuntimeError):
    """Root finding failed; carries the level, lambda and bracket state."""

    def __init__(self, msg: str, **context):
        self.context = context
        detail = ", ".join(f"{k}={v!r}" for k, v in context.items())
        super().__init__(f"{msg} ({detail})" if detail else msg)


@dataclass(frozen=True)
class FitConfig:
    lam: float
    scheme: str | WeightScheme = "general"
    root_tol: float = ROOT_TOL
    zero_tol: float = ZERO_TOL

    def __post_init__(self):
        if not (self.lam >= 0 and math.isfinite(self.lam)):
            raise ValueError(f"lambda must be finite and >= 0, got {self.lam}")
        if self.root_tol <= 0 or self.zero_tol <= 0:
            raise ValueError("tolerances must be positive")


@dataclass
class FitResult:
    """Output of :func:`fit`.

    Attributes
    ----------
    sigma_hat : ndarray of shape (p, p)
    k_hat : int
        Estimated bandwidth, the largest ``|j - k|`` with a nonzero taper.
    nu : ndarray of shape (p-1,)
        Multiplier of each level's ellipsoid projection; ``nu[l-1] <= 0``
        means level ``l`` zeroed its triangle. ``+inf`` when ``lam == 0``.
    taper : ndarray of shape (p-1,)
        ``taper[m-1]`` multiplies ``S`` on subdiagonal ``m``.
    primal_obj, dual_gap : float
        Objective value and primal minus dual objective at the implied dual point.
    dual_norms : ndarray of shape (p-1,)
        ``||A^(l)_{g_l}||_2`` of the implied dual blocks (feasible iff <= 1).
    sweeps : int
        Dual BCD sweeps used; 1 means the one-pass result was already optimal.
    converged : bool
        False if ``max_sweeps`` ran out before the gap certificate was met.
    dual_coef : ndarray of shape (p-1, p-1) or None
        Only with ``fit(..., keep_dual=True)``: ``dual_coef[l-1, m-1]`` is the
        coefficient of ``S_{s_m}`` in dual block ``l``.
    """

    sigma_hat: np.ndarray
    k_hat: int
    nu: np.ndarray
    taper: np.ndarray
    primal_obj: float
    dual_gap: float
    lam: float
    scheme: str
    dual_norms: np.ndarray = field(repr=False)
    sweeps: int = 1
    converged: bool = True
    dual_coef: np.ndarray | None = field(default=None, repr=False)

    @property
    def p(self) -> int:
        return self.sigma_hat.shape[0]

    def summary(self) -> dict:
        return {
            "lambda": self.lam,
            "scheme": self.scheme,
            "k_hat": self.k_hat,
            "nu": self.nu.tolist(),
            "taper": self.taper.tolist(),
            "primal_obj": self.primal_obj,
            "dual_gap": self.dual_gap,
            "sweeps": self.sweeps,
        }


def _scheme(scheme, p: int) -> WeightScheme:
    if isinstance(scheme, WeightScheme):
        if scheme.p != p:
            raise ValueError(f"weight scheme built for p={scheme.p}, matrix has p={p}")
        return scheme
    return WeightScheme(scheme, p)


def h_eval(nu: float, w: npt.ArrayLike, r: npt.ArrayLike) -> float:
    """``sum_m w_m**2 r_m**2 / (w_m**2 + nu)**2`` over terms with ``w_m > 0``."""
    w = np.asarray(w, dtype=float)
    r = np.asarray(r, dtype=float)
    if np.any(r < 0):
        raise ValueError("residual norms must be nonnegative")
    act = w > 0
    if not np.any(act):
        return 0.0
    w2 = w[act] ** 2
    if nu <= -w2.min():
        raise ValueError(f"nu={nu} crosses the pole at {-w2.min()}")
    return float(np.sum(w2 * r[act] ** 2 / (w2 + nu) ** 2))


def _secular_root(w2, wr2, target, lo, hi, *, tol, level, lam):
    """Root of ``h(nu) = target`` on ``(lo, hi)`` where ``h(lo) > target > h(hi)``.

    Newton on ``h**-0.5`` (concave and increasing, nearly linear) with a
    bisection fallback whenever a step leaves the bracket.
    """
    inv_sqrt_t = 1.0 / math.sqrt(target)
    nu = lo if math.isfinite(_h(lo, w2, wr2)) else 0.5 * (lo + hi)
    for _ in range(_MAX_ROOT_ITER):
        d = w2 + nu
        hv = float(np.sum(wr2 / d**2))
        if abs(hv - target) <= tol * target:
            return nu
        if hv > target:
            lo = nu
        else:
            hi = nu
        if hi - lo <= 4 * np.finfo(float).eps * max(1.0, abs(nu)):
            return nu
        dh = -2.0 * float(np.sum(wr2 / d**3))
        phi = hv**-0.5
        dphi = -0.5 * hv**-1.5 * dh
        step = nu - (phi - inv_sqrt_t) / dphi if dphi > 0 else np.nan
        nu = step if lo < step < hi else 0.5 * (lo + hi)
    raise NumericalError(
        "root finding did not converge", level=level, lam=lam, bracket=(lo, hi), nu=nu
    )


def _h(nu, w2, wr2):
    d = w2 + nu
    with np.errstate(divide="ignore"):
        return float(np.sum(wr2 / d**2)) if np.all(d > 0) else np.inf


def solve_nu(
    w: npt.ArrayLike,
    r: npt.ArrayLike,
    lam: float,
    root_tol: float = ROOT_TOL,
    level: int | None = None,
) -> float:
    """Multiplier ``nu`` with ``h(nu) = lam**2`` for one level.

    Parameters
    ----------
    w : array of shape (l,)
        ``w[l, 1..l]`` for this level.
    r : array of shape (l,)
        Norms of the current residual on subdiagonals ``1..l``.
    lam : float
        Positive tuning parameter.

    Returns
    -------
    float
        Positive when the level keeps a nonzero residual, ``<= 0`` when its
        triangle is zeroed. ``h(0) == lam**2`` exactly returns ``0.0``.

    Notes
    -----
    When all terms that contribute to ``h`` share one weight ``w`` (always the
    case for the ``group`` and ``simple`` schemes, and for hierarchical schemes
    right after a zeroed level) the root is ``w * (||r|| / lam - w)``.
    Otherwise ``nu`` is bracketed by ``[(||D r|| - lam w_l**2) / lam, ||D r|| / lam]``
    when positive, and by the pole ``-min w**2`` and 0 when not.
    """
    if not lam > 0:
        raise ValueError("solve_nu needs lam > 0")
    w = np.asarray(w, dtype=float)
    r = np.asarray(r, dtype=float)
    wl = float(w.max())
    act = (w > 0) & (r > 0)
    if not np.any(act):
        return -(wl**2)
    # h(nu) = lam**2 is homogeneous in (r, lam); unit scale keeps h clear of underflow
    c = float(r[act].max())
    wa, ra = w[act], r[act] / c
    lam = lam / c
    if np.all(wa == wa[0]):
        return float(wa[0] * (np.linalg.norm(ra) / lam - wa[0]))
    w2 = wa**2
    wr2 = w2 * ra**2
    target = lam * lam
    h0 = float(np.sum(ra**2 / w2))
    if h0 == target:
        return 0.0
    if h0 > target:
        dr = math.sqrt(float(np.sum(wr2)))
        lo = max((dr - lam * wl * wl) / lam, 0.0)
        hi = dr / lam
        # h(lo) >= lam**2 >= h(hi) holds exactly; only rounding can break it
        h_lo, h_hi = _h(lo, w2, wr2), _h(hi, w2, wr2)
        if h_lo <= target:
            if h_lo < target * (1 - 1e-9):
                raise NumericalError("bracket does not contain the root", level=level, lam=lam, bracket=(lo, hi))
            return lo
        if h_hi >= target:
            if h_hi > target * (1 + 1e-9):
                raise NumericalError("bracket does not contain the root", level=level, lam=lam, bracket=(lo, hi))
            return hi
        return _secular_root(w2, wr2, target, lo, hi, tol=root_tol, level=level, lam=lam)
    return _secular_root(w2, wr2, target, -float(w2.min()), 0.0, tol=root_tol, level=level, lam=lam)


def _weight_table(W: WeightScheme) -> np.ndarray:
    """Lower-triangular ``(p-1, p-1)`` table with row ``l-1`` holding ``w[l, 1..l]``."""
    q = W.p - 1
    T = np.zeros((q, q))
    for ell in range(1, q + 1):
        T[ell - 1, :ell] = W.level_weights(ell)
    return T


def _sweeps(norms: np.ndarray, lam: float, W: WeightScheme, root_tol: float, gap_tol: float, max_sweeps: int):
    """Dual BCD over levels ``1..p-1`` in the reduced subdiagonal coordinates.

    Everything on subdiagonal ``m`` stays parallel to ``S_{s_m}``, so the
    residual is ``scale[m] * S_{s_m}`` and dual block ``l`` is
    ``beta[l][m] * S_{s_m}``. The first sweep from zero dual blocks is the
    one-pass algorithm. For schemes whose weights vary within a level, one pass
    is not always optimal, so sweeps repeat (warm-started) until the duality gap
    drops below ``gap_tol * (1 + primal)``. The loop runs compiled.

    Plain sweeps can have a long sublinear tail. If the gap is still open after
    ``POLISH_AFTER`` sweeps, :func:`_newton_polish` supplies near-optimal dual
    blocks from a smoothed primal Newton solve and sweeping resumes from them.

    Returns ``(scale, nu, dual_norms, sweeps, converged, dual_coef)`` with
    ``dual_coef[l-1, m-1]`` the coefficient of ``S_{s_m}`` in dual block ``l``.
    """
    check = W.kind not in ("group", "simple")
    # the problem is equivariant under (S, lam) -> (S, lam) / c; nu, the taper and
    # the dual norms are unchanged, so solve at unit scale
    q = norms.size
    c = float(norms.max()) if q else 0.0
    c = c if c > 0 else 1.0
    n_unit = np.ascontiguousarray(norms, dtype=float) / c
    lam_unit = float(lam) / c
    Wm = _weight_table(W)
    beta = np.zeros((q, q))

    def run(budget):
        out = _kernels.sweeps(
            n_unit, Wm, lam_unit, float(root_tol), float(gap_tol), 1.0 / c**2, int(budget), check, beta
        )
        status, level = out[4], out[5]
        if status == _kernels.NO_CONVERGENCE:
            raise NumericalError("root finding did not converge", level=int(level), lam=lam, sweep=int(out[3]))
        if status == _kernels.BAD_BRACKET:
            raise NumericalError("bracket does not contain the root", level=int(level), lam=lam, sweep=int(out[3]))
        return out[:4]

    def gap_ratio(scale):
        primal, g = _kernels.gap(scale, n_unit, lam_unit, Wm)
        return g / (gap_tol * (1.0 / c**2 + abs(primal))) if gap_tol > 0 else (0.0 if g <= 0 else np.inf)

    def one_sweep_ratio(cand):
        out = _kernels.sweeps(n_unit, Wm, lam_unit, float(root_tol), 0.0, 1.0, 1, False, cand.copy())
        return (gap_ratio(out[0]), out[0]) if out[4] == _kernels.OK else (np.inf, None)

    first = min(max_sweeps, POLISH_AFTER) if check else max_sweeps
    scale, nu, dual, sweeps = run(first)
    if check and sweeps < max_sweeps and gap_ratio(scale) > 1.0:
        _newton_polish(n_unit, lam_unit, Wm, scale * n_unit, beta, one_sweep_ratio)
        scale, nu, dual, more = run(max_sweeps - sweeps)
        sweeps += more
    converged = not check or _gap(scale, norms, lam, W)[1] <= gap_tol
    return scale, nu, dual, int(sweeps), converged, beta / c


def _newton(norms, lam, W2, x, eps, max_iter=100):
    """Damped Newton on ``0.5 ||norms - x||^2 + lam * sum_l sqrt(u_l^2 + eps^2)``.

    ``u_l = ||(w[l,m] x[m])_m||_2`` with ``W2 = w**2``. ``eps = 0`` is the exact
    objective, smooth as long as every ``u_l`` stays positive. Returns
    ``(x, v)`` with ``v`` the smoothed group norms, or None on breakdown.
    """

    def value(x):
        v = np.sqrt(W2 @ x**2 + eps**2)
        return 0.5 * np.sum((norms - x) ** 2) + lam * np.sum(v), v

    fx, v = value(x)
    for _ in range(max_iter):
        if np.any(v <= 0):
            return None
        a = W2.T @ (1.0 / v)
        g = x - norms + lam * a * x
        V = W2 * x[None, :] / v[:, None] ** 1.5
        H = -lam * (V.T @ V)
        H[np.diag_indices_from(H)] += 1.0 + lam * a
        try:
            d = -linalg.cho_solve(linalg.cho_factor(H), g)
        except linalg.LinAlgError:
            return None
        decrement = -float(g @ d)
        if not decrement > 1e-20 * (1.0 + abs(fx)):
            break
        step = 1.0
        while True:
            f_new, v_new = value(x + step * d)
            if f_new <= fx - 1e-4 * step * decrement or step < 1e-12:
                break
            step *= 0.5
        x, fx, v = x + step * d, f_new, v_new
    if not (np.all(np.isfinite(x)) and np.all(v > 0)):
        return None
    return x, v


def _optimal_blocks(norms, Wm, x, v, k0=0):
    """Dual blocks ``w[l,m] x[m] / (norms[m] v_l)`` of the groups ``l >= k0``."""
    safe_n = np.where(norms[k0:] > 0, norms[k0:], 1.0)
    return np.where(norms[None, k0:] > 0, Wm[k0:, k0:] * x[None, :] / (safe_n[None, :] * v[:, None]), 0.0)


def _newton_polish(norms, lam, Wm, x0, beta, check, eps0=1e-5, factor=100.0, eps_min=1e-16) -> bool:
    """Newton-based warm start for the sweeps once they stall.

    In reduced coordinates ``x[m] = taper[m] * norms[m]`` the objective is

        0.5 * sum_m (norms[m] - x[m])**2 + lam * sum_l ||(w[l,m] x[m])_{m<=l}||_2.

    Stage one replaces each group norm ``u_l`` by ``sqrt(u_l**2 + eps**2)`` and
    runs Newton's method for a decreasing sequence of ``eps``. The smoothed
    minimiser gives strictly feasible dual blocks, which are near-optimal but
    leave barely active groups with tiny nonzero entries. Stage two zeroes the
    leading coordinates below a relative threshold, solves the exact objective
    on the rest by Newton (smooth there, since every remaining group is
    nonzero) and sets those groups' blocks to their optimality values.

    ``check(blocks)`` runs one warm sweep and returns ``(ratio, scale)``, where
    ``ratio <= 1`` means the gap certificate holds. A stage-two candidate
    replaces the stage-one blocks only if it passes; among passing candidates
    the one with the most zeros wins. Writes the chosen blocks into ``beta`` and
    returns True, or returns False with ``beta`` untouched.
    """
    W2 = Wm**2
    x = x0.copy()
    best, best_ratio, best_scale = None, np.inf, None
    eps = eps0
    while eps >= eps_min:
        sol = _newton(norms, lam, W2, x, eps)
        if sol is None:
            break
        x, v = sol
        cand = _optimal_blocks(norms, Wm, x, v)
        ratio, scale = check(cand)
        if ratio < best_ratio:
            best, best_ratio, best_scale = cand, ratio, scale
        if ratio <= 1.0:
            break
        eps /= factor
    if best is None:
        return False
    beta[...] = best
    if best_ratio > 1.0:
        return True
    xs = best_scale * norms
    if not np.any(xs > 0):
        return True
    start = int(np.argmax(xs > 0))
    tried = {start}
    for tau in (1e-10, 1e-8, 1e-6):
        k0 = int(np.argmax(xs > tau * xs.max()))
        if k0 in tried:
            continue
        tried.add(k0)
        sol = _newton(norms[k0:], lam, W2[k0:, k0:], xs[k0:].copy(), 0.0)
        if sol is None:
            continue
        cand = best.copy()
        cand[k0:, :] = 0.0
        cand[k0:, k0:] = _optimal_blocks(norms, Wm, *sol, k0)
        if check(cand)[0] <= 1.0:
            beta[...] = cand
    return True


def _sweeps_py(norms: np.ndarray, lam: float, W: WeightScheme, root_tol: float, gap_tol: float, max_sweeps: int):
    """Pure-Python twin of :func:`_sweeps`, kept as a reference for tests.

    Dual BCD over levels ``1..p-1`` in the reduced subdiagonal coordinates.

    Everything on subdiagonal ``m`` stays parallel to ``S_{s_m}``, so the
    residual is ``scale[m] * S_{s_m}`` and dual block ``l`` is
    ``beta[l][m] * S_{s_m}``. The first sweep from zero dual blocks is the
    one-pass algorithm. For schemes whose weights vary within a level, one pass
    is not always optimal, so sweeps repeat (warm-started) until the duality gap
    drops below ``gap_tol * (1 + primal)``.

    Returns ``(scale, nu, dual_norms, sweeps, converged)``.
    """
    q = norms.shape[0]
    c = float(norms.max()) if q else 0.0
    c = c if c > 0 else 1.0
    norms, lam = norms / c, lam / c
    ws = [W.level_weights(ell) for ell in range(1, q + 1)]
    acts = [w > 0 for w in ws]
    beta = [np.zeros(ell) for ell in range(1, q + 1)]
    scale = np.ones(q)
    nu = np.empty(q)
    dual = np.empty(q)
    for sweep in range(1, max_sweeps + 1):
        for ell in range(1, q + 1):
            w, act, b = ws[ell - 1], acts[ell - 1], beta[ell - 1]
            rho = scale[:ell] + lam * w * b if sweep > 1 else scale[:ell].copy()
            n_l = norms[:ell]
            nu_l = solve_nu(w, rho * n_l, lam, root_tol, level=ell)
            nu[ell - 1] = nu_l
            pos = max(nu_l, 0.0)
            w2 = w[act] ** 2
            b = np.zeros(ell)
            b[act] = w[act] * rho[act] / (lam * (w2 + pos))
            beta[ell - 1] = b
            dual[ell - 1] = float(np.linalg.norm(b * n_l))
            rho[act] = rho[act] / (1.0 + w2 / pos) if pos > 0 else 0.0
            scale[:ell] = rho
        if W.kind in ("group", "simple"):
            return scale, nu, dual, sweep, True
        primal, _, gap = _gap(scale, norms, lam, W)
        if gap <= gap_tol * (1.0 / c**2 + abs(primal)):
            return scale, nu, dual, sweep, True
    return scale, nu, dual, max_sweeps, False


def _gap(taper, norms, lam, W):
    """Primal value and duality gap relative to ``1 + |primal|``."""
    kept = taper * norms
    pen = penalty(kept, W)
    primal = 0.5 * float(np.sum(((1.0 - taper) * norms) ** 2)) + lam * pen
    # dual objective is 0.5||S||^2 - 0.5||Sigma_hat||^2; the difference simplifies to
    # lam * pen - <Sigma_hat, S - Sigma_hat>, which avoids cancellation
    gap = lam * pen - float(np.sum(taper * (1.0 - taper) * norms**2))
    return primal, gap / (1.0 + abs(primal)), gap


def penalty(norms: np.ndarray, W: WeightScheme) -> float:
    """Penalty value from the off-diagonal level norms of a matrix."""
    total = 0.0
    for ell in range(1, norms.shape[0] + 1):
        w = W.level_weights(ell)
        total += math.sqrt(float(np.sum((w * norms[:ell]) ** 2)))
    return total


def objective(Sigma: npt.ArrayLike, S: npt.ArrayLike, lam: float, scheme="general") -> float:
    """Primal objective ``0.5 ||Sigma - S||_F^2 + lam * pen(Sigma)`` for any symmetric ``Sigma``."""
    Sigma = np.asarray(Sigma, dtype=float)
    S = np.asarray(S, dtype=float)
    W = _scheme(scheme, S.shape[0])
    pen = penalty(subdiag_norms(Sigma), W) if S.shape[0] > 1 else 0.0
    return 0.5 * float(np.sum((Sigma - S) ** 2)) + lam * pen


def bandwidth_from_taper(taper: np.ndarray) -> int:
    """Largest ``|j - k|`` with a nonzero taper coefficient (0 if none)."""
    p = taper.shape[0] + 1
    nz = np.flatnonzero(taper)
    return 0 if nz.size == 0 else int(p - (nz[0] + 1))


def _result(S, norms, taper, nu, dual, lam, W, zero_tol, sweeps=1, converged=True, dual_coef=None) -> FitResult:
    taper = np.where(taper < zero_tol, 0.0, taper)
    primal, _, gap = _gap(taper, norms, lam, W)
    return FitResult(
        sigma_hat=apply_taper(S, taper),
        k_hat=bandwidth_from_taper(taper),
        nu=nu,
        taper=taper,
        primal_obj=primal,
        dual_gap=max(gap, 0.0),
        lam=float(lam),
        scheme=W.kind,
        dual_norms=dual,
        sweeps=sweeps,
        converged=converged,
        dual_coef=dual_coef,
    )


def fit(
    S: npt.ArrayLike,
    lam: float,
    scheme: str | WeightScheme = "general",
    *,
    root_tol: float = ROOT_TOL,
    zero_tol: float = ZERO_TOL,
    gap_tol: float = GAP_TOL,
    max_sweeps: int = MAX_SWEEPS,
    keep_dual: bool = False,
) -> FitResult:
    """Convex banding of ``S`` at tuning parameter ``lam``.

    Parameters
    ----------
    S : array-like of shape (p, p)
        Symmetric input, usually a sample covariance.
    lam : float
        Nonnegative tuning parameter; ``0`` returns ``S`` unchanged.
    scheme : str or WeightScheme, default="general"
    root_tol : float
        Relative tolerance on ``|h(nu) - lam**2|``.
    zero_tol : float
        Taper coefficients below this are reported as exact zeros.
    gap_tol : float
        Stop sweeping once ``gap <= gap_tol * (1 + |primal|)``.
    max_sweeps : int
        Cap on dual sweeps; ``1`` gives the plain one-pass estimate.
    keep_dual : bool, default=False
        Store the ``(p-1, p-1)`` dual coefficients for :func:`dual_blocks`.

    Returns
    -------
    FitResult
    """
    cfg = FitConfig(float(lam), scheme, root_tol, zero_tol)
    S = as_symmetric(S, name="S")
    p = S.shape[0]
    W = _scheme(cfg.scheme, p)
    norms = subdiag_norms(S)
    if p == 1 or cfg.lam <= LAM_FLOOR * float(norms.max()):
        q = p - 1
        coef = np.zeros((q, q)) if keep_dual else None
        return _result(S, norms, np.ones(q), np.full(q, np.inf), np.zeros(q), cfg.lam, W, cfg.zero_tol, dual_coef=coef)
    scale, nu, dual, sweeps, ok, coef = _sweeps(norms, cfg.lam, W, cfg.root_tol, gap_tol, max_sweeps)
    return _result(S, norms, scale, nu, dual, cfg.lam, W, cfg.zero_tol, sweeps, ok, coef if keep_dual else None)


def fit_simple(S: npt.ArrayLike, lam: float) -> FitResult:
    """Convex banding with ``simple`` weights by direct triangle soft-thresholding.

    Starting from ``S``, the triangle pair ``g_l`` (all entries with
    ``|j - k| >= p - l``) is scaled by ``(1 - lam * sqrt(2 l) / ||g_l||)_+`` for
    ``l = 1..p-1``. Operates on the dense matrix; no root finding.
    """
    S = as_symmetric(S, name="S")
    if lam < 0:
        raise ValueError("lambda must be >= 0")
    p = S.shape[0]
    W = WeightScheme("simple", p)
    if p == 1 or lam == 0:
        return fit(S, lam, W)
    idx = np.arange(p)
    dist = np.abs(idx[:, None] - idx[None, :])
    sigma = S.copy()
    nu = np.empty(p - 1)
    dual = np.empty(p - 1)
    factors = np.empty(p - 1)
    for ell in range(1, p):
        wl = math.sqrt(2.0 * ell)
        mask = dist >= p - ell
        g = float(np.linalg.norm(sigma[mask]))
        nu[ell - 1] = wl * (g / lam - wl)
        dual[ell - 1] = min(g / (lam * wl), 1.0)
        factors[ell - 1] = max(1.0 - lam * wl / g, 0.0) if g > 0 else 0.0
        sigma[mask] *= factors[ell - 1]
    # subdiagonal m sits in every triangle l >= m
    taper = np.cumprod(factors[::-1])[::-1]
    res = _result(S, subdiag_norms(S), taper, nu, dual, lam, W, ZERO_TOL)
    res.sigma_hat = sigma
    return res


def lambda_max(S: npt.ArrayLike, scheme="general") -> float:
    """``max_l ||S_{s_l}|| / w_l``; any ``lam`` at or above it gives a diagonal estimate.

    For the ``group`` scheme this is also the smallest such ``lam``. For
    hierarchical schemes it can overshoot; see :func:`lambda_diagonal`.
    """
    S = as_symmetric(S, name="S")
    p = S.shape[0]
    if p == 1:
        return 0.0
    W = _scheme(scheme, p)
    return float(np.max(subdiag_norms(S) / W.diag_weights()))


def lambda_diagonal(S: npt.ArrayLike, scheme="general", rtol: float = 1e-12) -> float:
    """Smallest ``lam`` giving a diagonal estimate, found by bisection below :func:`lambda_max`."""
    S = as_symmetric(S, name="S")
    p = S.shape[0]
    W = _scheme(scheme, p)
    hi = lambda_max(S, W)
    if hi == 0.0 or W.kind == "group":
        return hi
    norms = subdiag_norms(S)

    def diagonal(lam):
        scale = _sweeps(norms, lam, W, ROOT_TOL, GAP_TOL, MAX_SWEEPS)[0]
        return not np.any(scale * (norms > 0) >= ZERO_TOL)

    lo = 0.0
    while hi - lo > rtol * hi:
        mid = 0.5 * (lo + hi)
        if diagonal(mid):
            hi = mid
        else:
            lo = mid
    return hi


def taper_of(result: FitResult) -> np.ndarray:
    return result.taper.copy()


def reconstruct(S: npt.ArrayLike, taper: npt.ArrayLike) -> np.ndarray:
    """``T * S`` for the Toeplitz taper ``T`` (unit diagonal)."""
    S = as_symmetric(S, name="S")
    return apply_taper(S, np.asarray(taper, dtype=float))


def fixed_band(S: npt.ArrayLike, K: int) -> np.ndarray:
    """Banding estimator: keep entries with ``|j - k| <= K``, zero the rest."""
    S = as_symmetric(S, name="S")
    p = S.shape[0]
    if not 0 <= K <= p - 1:
        raise ValueError(f"bandwidth K={K} out of range 0..{p - 1}")
    idx = np.arange(p)
    return np.where(np.abs(idx[:, None] - idx[None, :]) <= K, S, 0.0)


def lambda_grid(S: npt.ArrayLike, scheme="general", num: int = 50, ratio: float = 0.01) -> np.ndarray:
    """Geometric grid from ``lambda_max`` down to ``ratio * lambda_max``."""
    if num < 1:
        raise ValueError("grid needs at least one point")
    top = lambda_max(S, scheme)
    if top == 0.0:
        return np.zeros(1)
    return np.geomspace(top, top * ratio, num)


def path(S: npt.ArrayLike, grid: npt.ArrayLike, scheme="general") -> list[FitResult]:
    """One independent fit per ``lam`` in a descending grid."""
    grid = np.asarray(grid, dtype=float)
    if grid.size == 0:
        raise ValueError("empty lambda grid")
    if np.any(np.diff(grid) > 0):
        raise ValueError("lambda grid must be sorted in descending order")
    S = as_symmetric(S, name="S")
    W = _scheme(scheme, S.shape[0])
    return [fit(S, float(lam), W) for lam in grid]


# --- explicit dual variables -------------------------------------------------


def _weight_matrix(W: WeightScheme, ell: int) -> np.ndarray:
    """Toeplitz ``W^(l)`` with ``w[l,m]`` on subdiagonal ``m <= l`` and zeros elsewhere."""
    p = W.p
    idx = np.arange(p)
    dist = np.abs(idx[:, None] - idx[None, :])
    vals = np.zeros(p + 1)
    # distance d is level p - d
    lw = W.level_weights(ell)
    for m in range(1, ell + 1):
        vals[p - m] = lw[m - 1]
    return vals[dist]


def dual_blocks(S: npt.ArrayLike, result: FitResult) -> list[np.ndarray]:
    """Materialise the dual blocks ``A^(l)`` implied by a fit.

    With stored ``result.dual_coef`` (``fit(..., keep_dual=True)``) the blocks
    are ``A^(l)_{s_m} = dual_coef[l-1, m-1] S_{s_m}``. Otherwise only a one-pass
    fit can be replayed: ``A^(l)_{s_m} = w[l,m] R^(l)_{s_m} / (lam (w[l,m]**2 + [nu_l]_+))``
    with the residual ``R^(l)`` rebuilt from the recorded ``nu``. Blocks are
    dense and zero outside ``g_l``; intended for certificates and tests at
    modest ``p``.
    """
    S = as_symmetric(S, name="S")
    p = S.shape[0]
    lam = result.lam
    if result.dual_coef is not None:
        idx = np.arange(p)
        level_of = p - np.abs(idx[:, None] - idx[None, :])  # subdiagonal index m, p on the diagonal
        blocks = []
        for ell in range(1, p):
            coef = np.zeros(p + 1)
            coef[1 : ell + 1] = result.dual_coef[ell - 1, :ell]
            blocks.append(coef[level_of] * S)
        return blocks
    if result.sweeps > 1:
        raise ValueError("a multi-sweep fit needs keep_dual=True to recover its dual blocks")
    W = WeightScheme(result.scheme, p) if result.scheme != "custom" else None
    if W is None:
        raise ValueError("dual_blocks needs a named scheme")
    R = S.copy()
    blocks = []
    for ell in range(1, p):
        Wl = _weight_matrix(W, ell)
        pos = max(result.nu[ell - 1], 0.0)
        with np.errstate(invalid="ignore", divide="ignore"):
            A = np.where(Wl > 0, Wl / (lam * (Wl**2 + pos)) * R, 0.0)
        blocks.append(A)
        R = R - lam * Wl * A
    return blocks


def dual_objective(S: npt.ArrayLike, lam: float, blocks, scheme="general") -> float:
    """Dual value ``0.5||S||^2 - 0.5||S - lam sum_l W^(l)*A^(l)||^2`` (to be maximised)."""
    S = np.asarray(S, dtype=float)
    W = _scheme(scheme, S.shape[0])
    M = S.copy()
    for ell, A in enumerate(blocks, start=1):
        M -= lam * _weight_matrix(W, ell) * A
    return 0.5 * float(np.sum(S**2)) - 0.5 * float(np.sum(M**2))


def dual_bcd(S: npt.ArrayLike, lam: float, scheme="general", sweeps: int = 1, blocks=None):
    """Cyclic block coordinate descent on the dual with dense blocks.

    Each block update projects the partial residual onto the level's ellipsoid.
    With ``blocks=None`` and ``sweeps=1`` this is the one-pass algorithm written
    out in full; extra sweeps let callers confirm that nothing moves.

    Returns
    -------
    sigma : ndarray
        ``S - lam * sum_l W^(l) * A^(l)``.
    blocks : list of ndarray
    """
    S = as_symmetric(S, name="S")
    p = S.shape[0]
    W = _scheme(scheme, p)
    Ws = [_weight_matrix(W, ell) for ell in range(1, p)]
    blocks = [np.zeros((p, p)) for _ in range(p - 1)] if blocks is None else [b.copy() for b in blocks]
    R_full = S.copy()
    for Wl, A in zip(Ws, blocks):
        R_full -= lam * Wl * A
    for _ in range(sweeps):
        for ell in range(1, p):
            Wl = Ws[ell - 1]
            R = R_full + lam * Wl * blocks[ell - 1]
            nr = subdiag_norms(R)[:ell]
            nu = solve_nu(W.level_weights(ell), nr, lam, level=ell)
            pos = max(nu, 0.0)
            with np.errstate(invalid="ignore", divide="ignore"):
                A = np.where(Wl > 0, Wl / (lam * (Wl**2 + pos)) * R, 0.0)
            blocks[ell - 1] = A
            R_full = R - lam * Wl * A
    return R_full, blocks
