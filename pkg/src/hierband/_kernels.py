"""Compiled dual BCD sweeps in reduced subdiagonal coordinates.

Mirrors :func:`hierband.solver.solve_nu` and the sweep loop, with weights
held in a dense lower-triangular table ``Wm[l-1, m-1] = w[l, m]``.
"""

import math

import numpy as np
from numba import njit

OK = 0
NO_CONVERGENCE = 1
BAD_BRACKET = 2
_EPS = np.finfo(np.float64).eps


@njit(cache=True, nogil=True)
def _h(nu, w2, wr2, k):
    s = 0.0
    for i in range(k):
        d = w2[i] + nu
        if d <= 0.0:
            return np.inf
        s += wr2[i] / (d * d)
    return s


@njit(cache=True, nogil=True)
def _secular(w2, wr2, k, target, lo, hi, tol):
    inv_sqrt_t = 1.0 / math.sqrt(target)
    nu = lo if np.isfinite(_h(lo, w2, wr2, k)) else 0.5 * (lo + hi)
    for _ in range(200):
        hv = 0.0
        dh = 0.0
        for i in range(k):
            d = w2[i] + nu
            hv += wr2[i] / (d * d)
            dh -= 2.0 * wr2[i] / (d * d * d)
        if abs(hv - target) <= tol * target:
            return nu, OK
        if hv > target:
            lo = nu
        else:
            hi = nu
        if hi - lo <= 4.0 * _EPS * max(1.0, abs(nu)):
            return nu, OK
        dphi = -0.5 * hv**-1.5 * dh
        step = nu - (hv**-0.5 - inv_sqrt_t) / dphi if dphi > 0.0 else np.nan
        if lo < step < hi:
            nu = step
        else:
            nu = 0.5 * (lo + hi)
    return nu, NO_CONVERGENCE


@njit(cache=True, nogil=True)
def solve_nu(w, r, lam, tol, w2, wr2):
    """Same contract as the Python ``solve_nu``; ``w2``/``wr2`` are scratch buffers."""
    n = w.size
    wl = 0.0
    for i in range(n):
        if w[i] > wl:
            wl = w[i]
    # h(nu) = lam**2 is homogeneous in (r, lam); unit scale keeps h clear of underflow
    c = 0.0
    for i in range(n):
        if w[i] > 0.0 and r[i] > c:
            c = r[i]
    if c > 0.0:
        lam = lam / c
    else:
        c = 1.0
    k = 0
    same = True
    first = 0.0
    rr = 0.0
    h0 = 0.0
    for i in range(n):
        if w[i] > 0.0 and r[i] > 0.0:
            ri = r[i] / c
            if k == 0:
                first = w[i]
            elif w[i] != first:
                same = False
            w2[k] = w[i] * w[i]
            wr2[k] = w2[k] * ri * ri
            rr += ri * ri
            h0 += ri * ri / w2[k]
            k += 1
    if k == 0:
        return -(wl * wl), OK
    if same:
        return first * (math.sqrt(rr) / lam - first), OK
    target = lam * lam
    if h0 == target:
        return 0.0, OK
    if h0 > target:
        dr = 0.0
        for i in range(k):
            dr += wr2[i]
        dr = math.sqrt(dr)
        lo = max((dr - lam * wl * wl) / lam, 0.0)
        hi = dr / lam
        h_lo = _h(lo, w2, wr2, k)
        h_hi = _h(hi, w2, wr2, k)
        if h_lo <= target:
            return lo, (BAD_BRACKET if h_lo < target * (1 - 1e-9) else OK)
        if h_hi >= target:
            return hi, (BAD_BRACKET if h_hi > target * (1 + 1e-9) else OK)
        return _secular(w2, wr2, k, target, lo, hi, tol)
    wmin = np.inf
    for i in range(k):
        if w2[i] < wmin:
            wmin = w2[i]
    return _secular(w2, wr2, k, target, -wmin, 0.0, tol)


@njit(cache=True, nogil=True)
def penalty(t, Wm):
    q = t.size
    total = 0.0
    for l in range(q):
        s = 0.0
        for m in range(l + 1):
            v = Wm[l, m] * t[m]
            s += v * v
        total += math.sqrt(s)
    return total


@njit(cache=True, nogil=True)
def gap(scale, norms, lam, Wm):
    q = norms.size
    t = np.empty(q)
    fid = 0.0
    cross = 0.0
    for m in range(q):
        t[m] = scale[m] * norms[m]
        fid += ((1.0 - scale[m]) * norms[m]) ** 2
        cross += scale[m] * (1.0 - scale[m]) * norms[m] ** 2
    pen = penalty(t, Wm)
    primal = 0.5 * fid + lam * pen
    return primal, lam * pen - cross


@njit(cache=True, nogil=True)
def sweeps(norms, Wm, lam, root_tol, gap_tol, unit, max_sweeps, check_gap, beta):
    """Returns ``(scale, nu, dual_norms, sweeps_done, status, level)``.

    ``beta[l, m]`` holds dual block ``l`` on subdiagonal ``m`` as a multiple of
    ``S_{s_m}``. It is read as the warm start (zeros for a cold start) and
    updated in place. Stops once ``gap <= gap_tol * (unit + |primal|)``.

    ``status`` is 0 on success (or sweep cap reached, see ``sweeps_done``),
    otherwise a root-finding failure at ``level``.
    """
    q = norms.size
    scale = np.ones(q)
    for l in range(q):
        for m in range(l + 1):
            scale[m] -= lam * Wm[l, m] * beta[l, m]
    nu = np.empty(q)
    dual = np.empty(q)
    rho = np.empty(q)
    rn = np.empty(q)
    w2 = np.empty(q)
    wr2 = np.empty(q)
    for sweep in range(1, max_sweeps + 1):
        for l in range(q):
            L = l + 1
            for m in range(L):
                rho[m] = scale[m] + lam * Wm[l, m] * beta[l, m]
                rn[m] = rho[m] * norms[m]
            nu_l, status = solve_nu(Wm[l, :L], rn[:L], lam, root_tol, w2, wr2)
            if status != OK:
                return scale, nu, dual, sweep, status, L
            nu[l] = nu_l
            pos = max(nu_l, 0.0)
            dn = 0.0
            for m in range(L):
                w = Wm[l, m]
                if w > 0.0:
                    b = w * rho[m] / (lam * (w * w + pos))
                    beta[l, m] = b
                    dn += (b * norms[m]) ** 2
                    scale[m] = rho[m] / (1.0 + w * w / pos) if pos > 0.0 else 0.0
                else:
                    beta[l, m] = 0.0
                    scale[m] = rho[m]
            dual[l] = math.sqrt(dn)
        if not check_gap:
            return scale, nu, dual, sweep, OK, 0
        primal, g = gap(scale, norms, lam, Wm)
        if g <= gap_tol * (unit + abs(primal)):
            return scale, nu, dual, sweep, OK, 0
    return scale, nu, dual, max_sweeps, OK, 0
