import numpy as np
import pytest

from hierband.matrix import sample_covariance
from hierband.model_select import CvPlan, cross_validate, fold_labels
from hierband.simlab import ma_cov, sample_gaussian
from hierband.solver import fit, lambda_max


def test_fold_labels_balanced_and_seeded():
    a = fold_labels(23, 5, 7)
    assert np.array_equal(a, fold_labels(23, 5, 7))
    assert not np.array_equal(a, fold_labels(23, 5, 8))
    counts = np.bincount(a)
    assert counts.max() - counts.min() <= 1
    with pytest.raises(ValueError):
        fold_labels(3, 5, 0)


def test_plan_validation():
    with pytest.raises(ValueError):
        CvPlan(folds=1)
    with pytest.raises(ValueError):
        CvPlan(grid=())
    with pytest.raises(ValueError):
        CvPlan(loss="kl")
    assert CvPlan(grid=(0.1, 0.3, 0.2)).grid == (0.3, 0.2, 0.1)


def test_single_lambda_grid():
    X = sample_gaussian(ma_cov(10, 3), 40, 0)
    rep = cross_validate(X, CvPlan(grid=(0.2,)))
    assert rep.selected_lambda == 0.2


def test_ties_go_to_largest_lambda():
    rng = np.random.default_rng(0)
    X = rng.standard_normal((50, 6))
    top = lambda_max(sample_covariance(X)) * 10
    rep = cross_validate(X, CvPlan(grid=(top * 4, top * 3, top * 2)))
    assert np.ptp(rep.mean_loss) == 0
    assert rep.selected_lambda == top * 4


def test_report_shape_and_determinism():
    X = sample_gaussian(ma_cov(12, 3), 60, 1)
    a = cross_validate(X, CvPlan(num=8, seed=3))
    b = cross_validate(X, CvPlan(num=8, seed=3), threads=3)
    assert a.to_json() == b.to_json()
    assert a.fold_losses.shape == (5, 8) and a.mean_loss.shape == (8,)
    assert np.all(np.isfinite(a.fold_losses)) and np.all(a.fold_losses >= 0)
    assert a.selected_lambda in a.grid
    assert a.one_se_lambda >= a.selected_lambda


def test_too_few_rows():
    with pytest.raises(ValueError):
        cross_validate(np.ones((3, 2)), CvPlan(folds=5))


@pytest.mark.slow
def test_cv_beats_half_lambda_max():
    Sigma = ma_cov(50, 5)
    cv_err, half_err = [], []
    for rep in range(20):
        X = sample_gaussian(Sigma, 200, 1000 + rep)
        S = sample_covariance(X)
        lam_cv = cross_validate(X, CvPlan(num=20, seed=rep)).selected_lambda
        cv_err.append(np.linalg.norm(fit(S, lam_cv).sigma_hat - Sigma))
        half_err.append(np.linalg.norm(fit(S, lambda_max(S) / 2).sigma_hat - Sigma))
    assert np.mean(cv_err) <= np.mean(half_err)
