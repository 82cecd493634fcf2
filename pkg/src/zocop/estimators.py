"""Scikit-learn style estimators wrapping the application solvers.

These are thin fit/predict adapters over the builders in ``apps``; all hard
work happens in the augmented Lagrangian solver. They play by the sklearn
rules (get_params/set_params, clone, validation helpers) so the models
compose with pipelines and model selection.
"""

from __future__ import annotations

import numpy as np
from sklearn.base import BaseEstimator, ClassifierMixin, RegressorMixin
from sklearn.utils.validation import check_array, check_is_fitted, check_X_y

from . import apps
from .exceptions import ValidationError


def _solver_kwargs(est) -> dict:
    return dict(
        mu=est.mu,
        tol_outer=est.tol,
        tol_feas=est.tol,
        max_outer=est.max_outer,
        max_inner=est.max_inner,
        mode=est.mode,
        rho=est.rho,
        strict_rank=False,
    )


def _to_signs(y, classes) -> np.ndarray:
    return np.where(y == classes[1], 1.0, -1.0)


class ZeroOneSVC(ClassifierMixin, BaseEstimator):
    """Binary classifier trained on the exact misclassification count.

    Parameters
    ----------
    lam : weight of the zero-one loss term.
    mu : proximal penalty of the outer loop.
    tol : stationarity and feasibility tolerance.
    mode : 'certified' derives the penalty from the data spectrum,
        'practical' takes a user rho, and 'auto' picks certified when the
        margin matrix has full row rank and practical (rho = 2 lam) otherwise.
    """

    def __init__(self, lam=10.0, mu=1.0, tol=1e-6, max_outer=500,
                 max_inner=10000, mode="auto", rho=None):
        self.lam = lam
        self.mu = mu
        self.tol = tol
        self.max_outer = max_outer
        self.max_inner = max_inner
        self.mode = mode
        self.rho = rho

    def fit(self, X, y):
        X, y = check_X_y(X, y)
        self.classes_ = np.unique(y)
        if self.classes_.shape[0] != 2:
            raise ValidationError("ZeroOneSVC needs exactly two classes")
        signs = _to_signs(y, self.classes_)
        data = apps.LabeledDataset(X, y=signs)
        w, report = apps.solve_svm(data, self.lam, **_solver_kwargs(self))
        self.coef_ = w[:-1]
        self.intercept_ = float(w[-1])
        self.report_ = report
        return self

    def decision_function(self, X):
        check_is_fitted(self, "coef_")
        X = check_array(X)
        return X @ self.coef_ + self.intercept_

    def predict(self, X):
        signs = apps.predict_sign(self.decision_function(X))
        return np.where(signs > 0, self.classes_[1], self.classes_[0])


class ZeroOneTwinSVC(ClassifierMixin, BaseEstimator):
    """Twin-plane classifier: assign to the class whose plane is nearer."""

    def __init__(self, lam1=1.0, lam2=10.0, lam3=1.0, lam4=10.0, mu=1.0,
                 tol=1e-6, max_outer=500, max_inner=10000, mode="auto",
                 rho=None):
        self.lam1 = lam1
        self.lam2 = lam2
        self.lam3 = lam3
        self.lam4 = lam4
        self.mu = mu
        self.tol = tol
        self.max_outer = max_outer
        self.max_inner = max_inner
        self.mode = mode
        self.rho = rho

    def fit(self, X, y):
        X, y = check_X_y(X, y)
        self.classes_ = np.unique(y)
        if self.classes_.shape[0] != 2:
            raise ValidationError("ZeroOneTwinSVC needs exactly two classes")
        pos = X[y == self.classes_[1]]
        neg = X[y == self.classes_[0]]
        w1, w2, reports = apps.solve_tsvm(
            pos, neg, (self.lam1, self.lam2, self.lam3, self.lam4),
            **_solver_kwargs(self),
        )
        self.plane_pos_ = w1
        self.plane_neg_ = w2
        self.reports_ = reports
        return self

    def predict(self, X):
        check_is_fitted(self, "plane_pos_")
        X = check_array(X)
        Xb = apps.append_bias(X)
        d_pos = np.abs(Xb @ self.plane_pos_) / max(
            np.linalg.norm(self.plane_pos_[:-1]), 1e-12
        )
        d_neg = np.abs(Xb @ self.plane_neg_) / max(
            np.linalg.norm(self.plane_neg_[:-1]), 1e-12
        )
        return np.where(d_pos <= d_neg, self.classes_[1], self.classes_[0])


class ZeroOneBinaryRelevance(ClassifierMixin, BaseEstimator):
    """Multi-label classifier: one independent zero-one SVM per label."""

    def __init__(self, lam=10.0, mu=1.0, tol=1e-6, max_outer=500,
                 max_inner=10000, mode="auto", rho=None, n_jobs=1):
        self.lam = lam
        self.mu = mu
        self.tol = tol
        self.max_outer = max_outer
        self.max_inner = max_inner
        self.mode = mode
        self.rho = rho
        self.n_jobs = n_jobs

    def fit(self, X, Y):
        X = check_array(X)
        Y = check_array(Y)
        if Y.ndim != 2:
            raise ValidationError("Y must be a label matrix")
        vals = np.unique(Y)
        if np.all(np.isin(vals, (0.0, 1.0))):
            self.label_zero_one_ = True
            signs = np.where(Y > 0, 1.0, -1.0)
        elif np.all(np.isin(vals, (-1.0, 1.0))):
            self.label_zero_one_ = False
            signs = Y.astype(float)
        else:
            raise ValidationError("Y entries must be in {0,1} or {-1,+1}")
        data = apps.LabeledDataset(X, Y=signs)
        kw = _solver_kwargs(self)
        self.coef_, self.reports_ = apps.solve_mlc(
            data, self.lam, jobs=self.n_jobs, **kw
        )
        return self

    def predict(self, X):
        check_is_fitted(self, "coef_")
        X = check_array(X)
        signs = apps.predict_sign(apps.append_bias(X) @ self.coef_)
        if self.label_zero_one_:
            return (signs > 0).astype(int)
        return signs


class RankCorrelationRidge(RegressorMixin, BaseEstimator):
    """Ridge regression with a rank-agreement zero-one penalty."""

    def __init__(self, lam1=1.0, lam2=1.0, xi=1e-3, mu=1.0, tol=1e-6,
                 max_outer=500, max_inner=10000, mode="auto", rho=None):
        self.lam1 = lam1
        self.lam2 = lam2
        self.xi = xi
        self.mu = mu
        self.tol = tol
        self.max_outer = max_outer
        self.max_inner = max_inner
        self.mode = mode
        self.rho = rho

    def fit(self, X, y):
        X, y = check_X_y(X, y)
        w, report = apps.solve_mrc(
            X, y, self.lam1, self.lam2, self.xi, **_solver_kwargs(self)
        )
        self.coef_ = w[:-1]
        self.intercept_ = float(w[-1])
        self.report_ = report
        return self

    def predict(self, X):
        check_is_fitted(self, "coef_")
        X = check_array(X)
        return X @ self.coef_ + self.intercept_
