"""Enforcing a minimum eigenvalue.

Banding shrinks entries but does not by itself guarantee a positive definite
result. When p > n the banded estimate can have negative eigenvalues. The
constrained variant adds Sigma >= delta * I and is solved by projected
gradient on the dual; its output keeps the banded structure and clears the
eigenvalue floor.

Run with ``python3 demos/03_positive_definite.py``.
"""

import numpy as np

from hierband import fit, sample_covariance
from hierband.matrix import bandwidth
from hierband.psd import fit_psd


def main():
    rng = np.random.default_rng(7)
    p, n = 40, 10
    X = rng.standard_normal((n, p))
    S = sample_covariance(X)
    lam = 0.05
    delta = 0.1

    r = fit(S, lam)
    print(f"unconstrained: min eigenvalue = {np.linalg.eigvalsh(r.sigma_hat)[0]:+.4f}, K_hat = {r.k_hat}")

    c = fit_psd(S, lam, delta)
    print(
        f"constrained:   min eigenvalue = {c.min_eig:+.4f} (floor {delta}), bandwidth = {bandwidth(c.sigma_tilde, 1e-12)}"
        f", iterations = {c.outer_iters}, converged = {c.converged}"
    )
    h = np.array(c.dual_history)
    print(f"dual objective decreased monotonically over {h.size} iterations: {bool(np.all(np.diff(h) <= 1e-12))}")
    print(f"distance moved to restore definiteness: ||Sigma_tilde - Sigma_hat||_F = "
          f"{np.linalg.norm(c.sigma_tilde - r.sigma_hat):.4f}")


if __name__ == "__main__":
    main()
