"""Reductions of the classification and ranking applications to CopProblem.

Builders always append a bias column of ones; callers provide raw features.
Each builder returns exact smoothness constants computed from the singular
values of its design matrix.
"""

from __future__ import annotations

from concurrent.futures import ThreadPoolExecutor
from dataclasses import dataclass
from typing import List, Optional, Tuple

import numpy as np
import scipy.linalg

from .exceptions import DimensionMismatchError, ValidationError
from .ialm import IterateState, SolveReport, solve_problem
from .problem import Array, CopProblem, quadratic_objective, spectral_info
from .zeroone import positive_count


@dataclass(frozen=True)
class LabeledDataset:
    """Raw features plus labels: y for binary/regression, Y for multi-label."""

    X: Array
    y: Optional[Array] = None
    Y: Optional[Array] = None

    def __post_init__(self):
        X = np.asarray(self.X, dtype=float)
        if X.ndim != 2 or X.size == 0:
            raise ValidationError("X must be a nonempty matrix")
        object.__setattr__(self, "X", X)
        if self.y is not None:
            y = np.asarray(self.y, dtype=float)
            if y.shape != (X.shape[0],):
                raise DimensionMismatchError("y length must match rows of X")
            object.__setattr__(self, "y", y)
        if self.Y is not None:
            Y = np.asarray(self.Y, dtype=float)
            if Y.ndim != 2 or Y.shape[0] != X.shape[0]:
                raise DimensionMismatchError("Y rows must match rows of X")
            object.__setattr__(self, "Y", Y)


def append_bias(X) -> Array:
    X = np.asarray(X, dtype=float)
    return np.hstack([X, np.ones((X.shape[0], 1))])


def _check_binary(y: Array) -> None:
    if not np.all(np.isin(y, (-1.0, 1.0))):
        raise ValidationError("labels must be exactly -1 or +1")


def svm_design(X_bias: Array, y: Array) -> Array:
    """Margin map rows: A[i] = -y_i * x_i, so (A w + b)_i = 1 - y_i w'x_i."""
    return -X_bias * y[:, None]


def build_svm(data: LabeledDataset, lam: float) -> CopProblem:
    """Hard-margin-counting SVM: f = ||w||^2 / 2, A = -(y 1') . X_b, b = 1."""
    if data.y is None:
        raise ValidationError("SVM needs binary labels y")
    _check_binary(data.y)
    Xb = append_bias(data.X)
    p = Xb.shape[1]
    objective = quadratic_objective(np.eye(p), np.zeros(p), l_f=1.0, sigma_f=1.0)
    return CopProblem(objective, svm_design(Xb, data.y), np.ones(Xb.shape[0]), lam)


def _regularized_quadratic(X_reg: Array, scale: float):
    """Objective ||w||^2/2 + (scale/2) ||X_reg w||^2 with exact constants."""
    p = X_reg.shape[1]
    H = np.eye(p) + scale * (X_reg.T @ X_reg)
    s = scipy.linalg.svdvals(X_reg)
    l_f = 1.0 + scale * s[0] ** 2
    smin = s[-1] if X_reg.shape[0] >= p else 0.0
    return quadratic_objective(H, np.zeros(p), l_f=l_f, sigma_f=1.0 + scale * smin**2)


def build_tsvm(
    pos, neg, lambdas: Tuple[float, float, float, float]
) -> Tuple[CopProblem, CopProblem]:
    """Twin SVM pair: each plane hugs one class and repels the other."""
    lam1, lam2, lam3, lam4 = lambdas
    pos = np.asarray(pos, dtype=float)
    neg = np.asarray(neg, dtype=float)
    if pos.ndim != 2 or pos.shape[0] == 0 or neg.ndim != 2 or neg.shape[0] == 0:
        raise ValidationError("both classes must be nonempty")
    if pos.shape[1] != neg.shape[1]:
        raise DimensionMismatchError("classes must share the feature dimension")
    Xp, Xn = append_bias(pos), append_bias(neg)
    prob1 = CopProblem(_regularized_quadratic(Xp, lam1), Xn, np.ones(Xn.shape[0]), lam2)
    prob2 = CopProblem(_regularized_quadratic(Xn, lam3), -Xp, np.ones(Xp.shape[0]), lam4)
    return prob1, prob2


def build_mlc(data: LabeledDataset, lam: float) -> List[CopProblem]:
    """Binary relevance: one independent SVM problem per label column."""
    if data.Y is None:
        raise ValidationError("MLC needs a label matrix Y")
    return [
        build_svm(LabeledDataset(data.X, y=data.Y[:, k]), lam)
        for k in range(data.Y.shape[1])
    ]


def difference_matrix(n: int) -> Array:
    """(n-1) x n upper bidiagonal with +1 diagonal, -1 superdiagonal."""
    B = np.zeros((n - 1, n))
    idx = np.arange(n - 1)
    B[idx, idx] = 1.0
    B[idx, idx + 1] = -1.0
    return B


def build_mrc(
    X, y, lambda1: float, lambda2: float, xi: float = 1e-3
) -> CopProblem:
    """Ridge regression with a rank-agreement zero-one term.

    Rows are stably sorted so the responses ascend; consecutive-score drops of
    less than xi are counted by the zero-one term. Tied responses impose an
    ordering constraint between the tied pair too (conservative reduction).
    """
    X = np.asarray(X, dtype=float)
    y = np.asarray(y, dtype=float)
    if X.ndim != 2 or y.shape != (X.shape[0],):
        raise DimensionMismatchError("X must be n x d with matching y")
    n = X.shape[0]
    if n < 2:
        raise ValidationError("MRC needs at least two observations")
    if xi <= 0 or lambda1 <= 0 or lambda2 <= 0:
        raise ValidationError("lambda1, lambda2, xi must be positive")
    order = np.argsort(y, kind="stable")
    Xb = append_bias(X[order])
    ys = y[order]
    p = Xb.shape[1]
    H = Xb.T @ Xb + lambda1 * np.eye(p)
    c = -Xb.T @ ys
    s = scipy.linalg.svdvals(Xb)
    smin = s[-1] if n >= p else 0.0
    objective = quadratic_objective(
        H, c, d=0.5 * float(ys @ ys),
        l_f=lambda1 + s[0] ** 2, sigma_f=lambda1 + smin**2,
    )
    A = difference_matrix(n) @ Xb
    return CopProblem(objective, A, xi * np.ones(n - 1), lambda2)


def predict_sign(scores) -> Array:
    """Paper sign convention: +1 for strictly positive, -1 otherwise."""
    return np.where(np.asarray(scores) > 0.0, 1.0, -1.0)


@dataclass(frozen=True)
class Evaluation:
    accuracy: float
    hamming_loss: float
    zero_one_objective: int


def evaluate(w, data: LabeledDataset, task: str) -> Evaluation:
    """Training metrics for a fitted weight vector (SVM) or matrix (MLC)."""
    Xb = append_bias(data.X)
    if task == "svm":
        if data.y is None:
            raise ValidationError("SVM evaluation needs y")
        W = np.asarray(w, dtype=float).reshape(-1, 1)
        labels = data.y.reshape(-1, 1)
    elif task == "mlc":
        if data.Y is None:
            raise ValidationError("MLC evaluation needs Y")
        W = np.asarray(w, dtype=float)
        if W.ndim != 2:
            raise DimensionMismatchError("MLC needs one weight column per label")
        labels = data.Y
    else:
        raise ValidationError("task must be 'svm' or 'mlc'")
    if W.shape[0] != Xb.shape[1]:
        raise DimensionMismatchError("weights do not match features plus bias")
    pred = predict_sign(Xb @ W)
    n, m = labels.shape
    accuracy = float(np.mean(pred == labels))
    hamming = float(np.sum(np.abs(pred - labels)) / (2.0 * n * m))
    zero_one = 0
    for k in range(m):
        margins = svm_design(Xb, labels[:, k]) @ W[:, k] + 1.0
        zero_one += positive_count(margins)
    return Evaluation(accuracy, hamming, zero_one)


def _resolve_mode(problem: CopProblem, kw: dict) -> dict:
    """Expand mode='auto': certified when A has full row rank, otherwise
    practical with rho = 2 lam (the prox threshold then equals 1, the margin
    scale of the classification reductions)."""
    if kw.get("mode", "certified") != "auto":
        return kw
    kw = dict(kw)
    if spectral_info(problem.A).full_row_rank:
        kw["mode"] = "certified"
    else:
        kw["mode"] = "practical"
        if kw.get("rho") is None:
            kw["rho"] = 2.0 * problem.lam
        kw["strict_rank"] = False
    return kw


def _ridge_warm_start(problem: CopProblem, Xb: Array, y: Array) -> IterateState:
    """Scaled least-squares start with every margin met when separable.

    The default start (w = 0, u = b = 1) is itself stationary for margin
    problems once sqrt(2 lam / rho) < 1, so an informed start is needed to
    reach a useful basin.
    """
    p = Xb.shape[1]
    G = Xb.T @ Xb + 1e-6 * np.eye(p)
    w = scipy.linalg.solve(G, Xb.T @ y, assume_a="pos")
    margins = y * (Xb @ w)
    m_min = float(margins.min())
    if m_min > 0:
        w = w * (2.0 / m_min)
    u = problem.A @ w + problem.b
    return IterateState(w=w, u=u, z=np.zeros(problem.n), v=w.copy())


def solve_svm(data: LabeledDataset, lam: float, **solver_kw) -> Tuple[Array, SolveReport]:
    """Build and solve the SVM problem; returns (weights incl. bias, report)."""
    problem = build_svm(data, lam)
    solver_kw = _resolve_mode(problem, solver_kw)
    init = solver_kw.pop("init", None)
    if init is None:
        init = _ridge_warm_start(problem, append_bias(data.X), data.y)
    report = solve_problem(problem, init=init, **solver_kw)
    return report.final.w, report


def solve_tsvm(
    pos, neg, lambdas: Tuple[float, float, float, float], **solver_kw
) -> Tuple[Array, Array, Tuple[SolveReport, SolveReport]]:
    """Solve both twin problems; returns the two plane weights and reports."""
    prob1, prob2 = build_tsvm(pos, neg, lambdas)
    Xp, Xn = append_bias(np.asarray(pos, float)), append_bias(np.asarray(neg, float))
    # Targets: hug the own class (score 0), repel the other past the margin.
    init1 = _tsvm_warm_start(prob1, Xp, Xn)
    init2 = _tsvm_warm_start(prob2, Xn, Xp)
    rep1 = solve_problem(prob1, init=init1, **_resolve_mode(prob1, solver_kw))
    rep2 = solve_problem(prob2, init=init2, **_resolve_mode(prob2, solver_kw))
    return rep1.final.w, rep2.final.w, (rep1, rep2)


def _tsvm_warm_start(problem: CopProblem, X_own: Array, X_other: Array) -> IterateState:
    p = X_own.shape[1]
    G = X_own.T @ X_own + X_other.T @ X_other + 1e-6 * np.eye(p)
    rhs = X_other.T @ (-2.0 * np.ones(X_other.shape[0]))
    w = scipy.linalg.solve(G, rhs, assume_a="pos")
    u = problem.A @ w + problem.b
    return IterateState(w=w, u=u, z=np.zeros(problem.n), v=w.copy())


def solve_mlc(
    data: LabeledDataset, lam: float, jobs: int = 1, **solver_kw
) -> Tuple[Array, List[SolveReport]]:
    """Train all binary-relevance models; returns (p x m weights, reports).

    Label problems share no mutable state, so fan-out across threads yields
    bitwise-identical models for any jobs value.
    """
    problems = build_mlc(data, lam)
    Xb = append_bias(data.X)

    def train(k: int) -> Tuple[Array, SolveReport]:
        problem = problems[k]
        kw = _resolve_mode(problem, solver_kw)
        init = _ridge_warm_start(problem, Xb, data.Y[:, k])
        report = solve_problem(problem, init=init, **kw)
        return report.final.w, report

    if jobs <= 1:
        results = [train(k) for k in range(len(problems))]
    else:
        with ThreadPoolExecutor(max_workers=jobs) as pool:
            results = list(pool.map(train, range(len(problems))))
    W = np.column_stack([w for w, _ in results])
    return W, [rep for _, rep in results]


def solve_mrc(
    X, y, lambda1: float, lambda2: float, xi: float = 1e-3, **solver_kw
) -> Tuple[Array, SolveReport]:
    """Build and solve the rank-regression problem."""
    problem = build_mrc(X, y, lambda1, lambda2, xi)
    report = solve_problem(problem, **_resolve_mode(problem, solver_kw))
    return report.final.w, report
