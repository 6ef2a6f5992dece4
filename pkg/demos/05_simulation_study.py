"""A small Monte-Carlo study of estimation error.

For MA(K) covariances the Frobenius error of the banded estimator grows
roughly linearly in K and falls with the sample size, and the general
hierarchical weights beat the simple ones. This script runs a reduced version
of that study (3 replicates per cell) through the same harness the
``hierband simulate`` command uses.

The fixed lambda is conservative: for wide bands it shrinks true signal and
the sample covariance ends up with lower Frobenius loss. The point here is
the trend in K and n, which the rate bounds predict at this lambda.

Run with ``python3 demos/05_simulation_study.py`` (a few seconds).
"""

import numpy as np

from hierband.simlab import CovModel, run_experiment


def main():
    p, n, reps = 200, 100, 3
    print(f"p = {p}, n = {n}, {reps} replicates, lambda = 2 sqrt(log p / n)\n")
    print("   K   general F^2/p   simple F^2/p   sample F^2/p")
    for K in (10, 20, 40):
        rep = run_experiment(CovModel("ma", p, K=K), n, reps, estimators=("general", "simple", "sample"), seed=K)
        row = [rep.summary[e]["frob2_over_p_mean"] for e in ("general", "simple", "sample")]
        print(f"  {K:2d}   {row[0]:13.3f}   {row[1]:12.3f}   {row[2]:12.3f}")

    ns = np.array([50, 100, 200, 400])
    losses = [
        run_experiment(CovModel("ma", p, K=20), int(m), reps, seed=int(m)).summary["general"]["frob2_over_p_mean"]
        for m in ns
    ]
    slope = np.polyfit(np.log(ns), np.log(losses), 1)[0]
    print(f"\nK = 20: log-log slope of F^2/p against n = {slope:.2f}")


if __name__ == "__main__":
    main()
