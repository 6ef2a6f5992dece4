"""Command-line front end: ``hierband {fit,path,cv,simulate,classify}``.

Exit codes: 0 success, 2 usage or input error, 1 numerical failure.
"""

from __future__ import annotations

import argparse
import logging
import math
import os
import sys
from dataclasses import dataclass, field

import numpy as np

from . import __version__
from .discriminant import predict, train
from .io import read_labels, read_matrix, write_json, write_matrix, write_table
from .matrix import as_symmetric, bandwidth, frobenius_dist, sample_covariance
from .model_select import CvPlan, cross_validate
from .psd import fit_psd
from .simlab import ESTIMATORS, CovModel, run_experiment
from .solver import NumericalError, fit, lambda_grid, path
from .weights import read_weight_csv

log = logging.getLogger("hierband")

# options that only say where to put results or how fast to get them; they are
# left out of the recorded config so reruns into another directory compare equal
_NOT_RECORDED = {"out", "out_dir", "csv", "accuracy_out", "threads", "verbose", "quiet"}


class UsageError(Exception):
    pass


@dataclass(frozen=True)
class RunConfig:
    """Validated subcommand plus every option, as parsed."""

    subcommand: str
    options: dict = field(default_factory=dict)

    def recorded(self) -> dict:
        opts = {k: v for k, v in sorted(self.options.items()) if k not in _NOT_RECORDED}
        return {"subcommand": self.subcommand, "version": __version__, **opts}


def _nonneg_float(text: str) -> float:
    try:
        x = float(text)
    except ValueError:
        raise argparse.ArgumentTypeError(f"not a number: {text!r}") from None
    if not (math.isfinite(x) and x >= 0):
        raise argparse.ArgumentTypeError(f"must be finite and >= 0, got {text}")
    return x


def _pos_float(text: str) -> float:
    x = _nonneg_float(text)
    if x == 0:
        raise argparse.ArgumentTypeError("must be > 0")
    return x


def _pos_int(text: str) -> int:
    try:
        k = int(text)
    except ValueError:
        raise argparse.ArgumentTypeError(f"not an integer: {text!r}") from None
    if k < 1:
        raise argparse.ArgumentTypeError(f"must be >= 1, got {k}")
    return k


def _ratio(text: str) -> float:
    x = _pos_float(text)
    if x >= 1:
        raise argparse.ArgumentTypeError("must lie in (0, 1)")
    return x


def _lambda_rule(text: str):
    if text in ("theory", "cv"):
        return text
    try:
        return _nonneg_float(text)
    except argparse.ArgumentTypeError:
        raise argparse.ArgumentTypeError(f"expected 'theory', 'cv' or a number >= 0, got {text!r}") from None


def _estimators(text: str) -> list[str]:
    names = [t.strip() for t in text.split(",") if t.strip()]
    bad = [n for n in names if n not in ESTIMATORS]
    if bad or not names:
        raise argparse.ArgumentTypeError(f"unknown estimator(s) {bad}; choose from {', '.join(ESTIMATORS)}")
    return names


def build_parser() -> argparse.ArgumentParser:
    common = argparse.ArgumentParser(add_help=False)
    common.add_argument("--threads", type=_pos_int, default=os.cpu_count() or 1,
                        help="worker threads for cv and simulate (default: all cores)")
    common.add_argument("-v", "--verbose", action="store_true", help="log progress to stderr")
    common.add_argument("-q", "--quiet", action="store_true", help="only report errors")

    weights = argparse.ArgumentParser(add_help=False)
    weights.add_argument("--weights", choices=("group", "simple", "general"), default="general",
                         help="penalty weight scheme (default: general)")
    weights.add_argument("--weights-csv", metavar="PATH",
                         help="custom weights as CSV rows l,m,w (overrides --weights)")

    data = argparse.ArgumentParser(add_help=False)
    data.add_argument("--input", required=True, metavar="CSV", help="n x p data matrix (optional header row)")
    data.add_argument("--cov-input", action="store_true", help="treat --input as a p x p covariance matrix")
    data.add_argument("--no-center", action="store_true", help="do not subtract column means")

    ap = argparse.ArgumentParser(
        prog="hierband",
        description="Convex banding of covariance matrices with a hierarchical group-lasso penalty.",
    )
    ap.add_argument("--version", action="version", version=f"%(prog)s {__version__}")
    sub = ap.add_subparsers(dest="subcommand", required=True, metavar="COMMAND")

    p = sub.add_parser("fit", parents=[common, data, weights], help="fit at one lambda",
                       description="Fit at one lambda; writes sigma_hat.csv and fit.json.")
    p.add_argument("--lambda", dest="lam", type=_nonneg_float, required=True, help="tuning parameter >= 0")
    p.add_argument("--pd", action="store_true", help="enforce Sigma >= delta * I")
    p.add_argument("--delta", type=_pos_float, default=None,
                   help="eigenvalue floor for --pd (default: 1e-4 * mean diagonal of S)")
    p.add_argument("--out-dir", default=".", help="output directory (default: current)")

    p = sub.add_parser("path", parents=[common, data, weights], help="fit along a lambda grid",
                       description="Fit along a geometric grid from lambda_max down to ratio * lambda_max; "
                                   "writes one CSV row per lambda (lambda, k_hat, frobenius_to_S, dual_gap).")
    p.add_argument("--grid", type=_pos_int, default=50, help="number of grid points (default: 50)")
    p.add_argument("--ratio", type=_ratio, default=0.01, help="smallest / largest lambda (default: 0.01)")
    p.add_argument("--out", default="path.csv", help="output CSV (default: path.csv)")

    p = sub.add_parser("cv", parents=[common, weights], help="choose lambda by K-fold cross-validation",
                       description="K-fold cross-validation on an n x p data matrix; writes cv.json.")
    p.add_argument("--input", required=True, metavar="CSV", help="n x p data matrix (optional header row)")
    p.add_argument("--no-center", action="store_true", help="do not subtract column means")
    p.add_argument("--folds", type=_pos_int, default=5, help="number of folds (default: 5)")
    p.add_argument("--grid", type=_pos_int, default=50, help="number of grid points (default: 50)")
    p.add_argument("--ratio", type=_ratio, default=0.01, help="smallest / largest lambda (default: 0.01)")
    p.add_argument("--seed", type=int, default=0, help="fold assignment seed (default: 0)")
    p.add_argument("--out", default="cv.json", help="output JSON (default: cv.json)")

    p = sub.add_parser("simulate", parents=[common], help="Monte-Carlo comparison on a covariance design",
                       description="Monte-Carlo losses of several estimators; writes report.json and a "
                                   "per-(replicate, estimator) CSV next to it.")
    p.add_argument("--model", choices=("ma", "cy", "spiked"), default="ma", help="covariance design")
    p.add_argument("--K", type=_pos_int, default=None, help="bandwidth for ma and spiked")
    p.add_argument("--p", type=_pos_int, required=True, help="dimension")
    p.add_argument("--n", type=_pos_int, required=True, help="sample size per replicate")
    p.add_argument("--reps", type=_pos_int, default=20, help="replicates (default: 20)")
    p.add_argument("--lambda-rule", dest="lambda_rule", type=_lambda_rule, default="theory",
                   help="'theory' (2 sqrt(log p / n)), 'cv', or a fixed value (default: theory)")
    p.add_argument("--estimators", type=_estimators, default=list(ESTIMATORS),
                   help=f"comma-separated subset of {','.join(ESTIMATORS)} (default: all)")
    p.add_argument("--seed", type=int, default=0, help="sampling seed (default: 0)")
    p.add_argument("--model-seed", type=int, default=0, help="seed for the random cy design (default: 0)")
    p.add_argument("--out", default="report.json", help="output JSON (default: report.json)")
    p.add_argument("--csv", default=None, help="per-replicate CSV (default: --out with .csv suffix)")

    p = sub.add_parser("classify", parents=[common, weights], help="banded QDA / LDA classification",
                       description="Train on labelled data, predict the test rows; writes predictions "
                                   "and an accuracy JSON.")
    p.add_argument("--train", required=True, metavar="CSV", help="training data, n x p")
    p.add_argument("--labels", required=True, metavar="CSV", help="training labels, one per row")
    p.add_argument("--test", required=True, metavar="CSV", help="test data, m x p")
    p.add_argument("--test-labels", metavar="CSV", help="test labels, to report test accuracy")
    p.add_argument("--mode", choices=("qda", "lda"), default="qda")
    g = p.add_mutually_exclusive_group()
    g.add_argument("--cv", action="store_true", help="pick each class's lambda by cross-validation")
    g.add_argument("--lambda", dest="lam", type=_nonneg_float, default=None,
                   help="shared lambda (default without --cv: sample covariances)")
    p.add_argument("--folds", type=_pos_int, default=5)
    p.add_argument("--grid", type=_pos_int, default=50)
    p.add_argument("--seed", type=int, default=0, help="fold seed for --cv (default: 0)")
    p.add_argument("--out", default="predictions.csv", help="predictions CSV (default: predictions.csv)")
    p.add_argument("--accuracy-out", default="accuracy.json", help="accuracy JSON (default: accuracy.json)")
    return ap


def _scheme(opts, p):
    if opts.get("weights_csv"):
        return read_weight_csv(opts["weights_csv"], p)
    return opts["weights"]


def _load_cov(opts) -> np.ndarray:
    M = read_matrix(opts["input"])
    if opts["cov_input"]:
        return as_symmetric(M, atol=1e-10, name=opts["input"])
    return sample_covariance(M, center=not opts["no_center"])


def _run_fit(cfg: RunConfig) -> None:
    o = cfg.options
    S = _load_cov(o)
    scheme = _scheme(o, S.shape[0])
    out = o["out_dir"]
    if o["pd"]:
        res = fit_psd(S, o["lam"], delta=o["delta"], scheme=scheme)
        sigma = res.sigma_tilde
        payload = {
            "lambda": o["lam"],
            "k_hat": bandwidth(sigma),
            "primal_obj": res.primal_obj,
            "min_eig": res.min_eig,
            "outer_iters": res.outer_iters,
            "converged": res.converged,
            "coincides_with_unconstrained": res.coincides_with_unconstrained,
        }
    else:
        res = fit(S, o["lam"], scheme)
        sigma = res.sigma_hat
        payload = {k: v for k, v in res.summary().items() if k not in ("scheme",)}
    write_matrix(os.path.join(out, "sigma_hat.csv"), sigma)
    write_json(os.path.join(out, "fit.json"), payload, cfg.recorded())
    log.info("k_hat=%s", payload["k_hat"])


def _run_path(cfg: RunConfig) -> None:
    o = cfg.options
    S = _load_cov(o)
    scheme = _scheme(o, S.shape[0])
    grid = lambda_grid(S, scheme, o["grid"], o["ratio"])
    rows = [(r.lam, r.k_hat, frobenius_dist(r.sigma_hat, S), r.dual_gap) for r in path(S, grid, scheme)]
    write_table(o["out"], ["lambda", "k_hat", "frobenius_to_S", "dual_gap"], rows)


def _run_cv(cfg: RunConfig) -> None:
    o = cfg.options
    X = read_matrix(o["input"])
    plan = CvPlan(folds=o["folds"], seed=o["seed"], num=o["grid"], ratio=o["ratio"], center=not o["no_center"])
    rep = cross_validate(X, plan, _scheme(o, X.shape[1]), threads=o["threads"])
    write_json(o["out"], rep.to_json(), cfg.recorded())
    log.info("selected lambda %.6g", rep.selected_lambda)


def _run_simulate(cfg: RunConfig) -> None:
    o = cfg.options
    if o["model"] in ("ma", "spiked") and o["K"] is None:
        raise UsageError(f"--model {o['model']} needs --K")
    try:
        model = CovModel(o["model"], o["p"], o["K"], o["model_seed"])
    except ValueError as exc:
        raise UsageError(str(exc)) from None
    rep = run_experiment(model, o["n"], o["reps"], o["estimators"], o["lambda_rule"], o["seed"], o["threads"])
    write_json(o["out"], rep.to_json(timing=False), cfg.recorded())
    csv_path = o["csv"] or os.path.splitext(o["out"])[0] + ".csv"
    cols = ["rep", "estimator", "frob2_over_p", "op", "k_hat", "lam"]
    write_table(csv_path, cols, [[r[c] for c in cols] for r in rep.records])


def _run_classify(cfg: RunConfig) -> None:
    o = cfg.options
    X, y, Xt = read_matrix(o["train"]), read_labels(o["labels"]), read_matrix(o["test"])
    if y.shape[0] != X.shape[0]:
        raise UsageError(f"{y.shape[0]} labels for {X.shape[0]} training rows")
    if Xt.shape[1] != X.shape[1]:
        raise UsageError(f"test data has {Xt.shape[1]} columns, training data has {X.shape[1]}")
    plan = CvPlan(folds=o["folds"], seed=o["seed"], num=o["grid"]) if o["cv"] else None
    model = train(X, y, o["mode"], lam=o["lam"], cv=plan, scheme=_scheme(o, X.shape[1]), threads=o["threads"])
    pred = predict(model, Xt)
    write_table(o["out"], ["prediction"], [[v] for v in pred])
    payload = {
        "train_accuracy": float(np.mean(predict(model, X) == y)),
        "lambdas": {str(c): float(l) for c, l in zip(model.classes, model.lambdas)},
    }
    if o["test_labels"]:
        yt = read_labels(o["test_labels"])
        if yt.shape[0] != Xt.shape[0]:
            raise UsageError(f"{yt.shape[0]} test labels for {Xt.shape[0]} test rows")
        payload["test_accuracy"] = float(np.mean(pred == yt))
    write_json(o["accuracy_out"], payload, cfg.recorded())


_COMMANDS = {
    "fit": _run_fit,
    "path": _run_path,
    "cv": _run_cv,
    "simulate": _run_simulate,
    "classify": _run_classify,
}


def main(argv: list[str] | None = None) -> int:
    parser = build_parser()
    try:
        ns = parser.parse_args(argv)
    except SystemExit as exc:  # argparse: 0 for --help, 2 for usage errors
        return int(exc.code or 0)
    opts = vars(ns)
    cmd = opts.pop("subcommand")
    cfg = RunConfig(cmd, opts)
    level = logging.ERROR if opts["quiet"] else logging.INFO if opts["verbose"] else logging.WARNING
    logging.basicConfig(level=level, format="hierband: %(message)s", stream=sys.stderr)
    try:
        _COMMANDS[cmd](cfg)
    except (UsageError, OSError, ValueError) as exc:
        print(f"hierband {cmd}: error: {exc}", file=sys.stderr)
        return 2
    except (NumericalError, RuntimeError, np.linalg.LinAlgError, FloatingPointError) as exc:
        print(f"hierband {cmd}: numerical failure: {exc}", file=sys.stderr)
        return 1
    return 0


if __name__ == "__main__":
    sys.exit(main())
