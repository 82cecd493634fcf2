"""Proximal operator, subdifferential, thresholds, and stationarity residuals
for the composed zero-one loss ``lam * ||(.)_+||_0``.

All prox branching happens at the threshold sqrt(2*lam*alpha): strict interior
components go to 0, exact boundary hits are set-valued ties (canonical member
0), everything else passes through. Tie detection uses exact float equality; a
tolerance band would silently change the branch structure near the threshold.
"""

from __future__ import annotations

import math
from dataclasses import dataclass
from enum import IntEnum

import numpy as np

from .exceptions import DimensionMismatchError, ValidationError
from .problem import Array, CopProblem


class ProxBranch(IntEnum):
    PASS_THROUGH = 0
    ZERO = 1
    TIE = 2


@dataclass(frozen=True)
class ProxResult:
    """Componentwise prox output with canonical tie selection.

    ``canonical`` always picks 0 on Zero and Tie components (the sparser
    member). ``tie_alternative`` holds the non-selected member where the
    branch is Tie and NaN elsewhere.
    """

    canonical: Array
    branch: Array
    tie_alternative: Array


def _check_scalars(lam: float, alpha: float) -> None:
    if not (np.isfinite(lam) and lam > 0):
        raise ValidationError("lam must be a positive real")
    if not (np.isfinite(alpha) and alpha > 0):
        raise ValidationError("alpha must be a positive real")


def prox_zero_one(center, lam: float, alpha: float) -> ProxResult:
    """Componentwise ``Prox_{alpha * lam * ||(.)_+||_0}`` at ``center``."""
    _check_scalars(lam, alpha)
    center = np.asarray(center, dtype=float)
    if not np.all(np.isfinite(center)):
        raise ValidationError("center has non-finite components")
    thr = math.sqrt(2.0 * lam * alpha)
    zero = (center > 0.0) & (center < thr)
    tie = (center == 0.0) | (center == thr)
    branch = np.full(center.shape, ProxBranch.PASS_THROUGH, dtype=np.int8)
    branch[zero] = ProxBranch.ZERO
    branch[tie] = ProxBranch.TIE
    canonical = np.where(zero | tie, 0.0, center)
    tie_alternative = np.where(tie, center, np.nan)
    return ProxResult(canonical, branch, tie_alternative)


def prox_distance(u, center, lam: float, alpha: float) -> float:
    """Euclidean distance from u to the (possibly set-valued) prox of center.

    Tie components contribute the closer of the two set members {0, center_i}.
    """
    _check_scalars(lam, alpha)
    u = np.asarray(u, dtype=float)
    center = np.asarray(center, dtype=float)
    if u.shape != center.shape:
        raise DimensionMismatchError("u and center must have the same shape")
    if not (np.all(np.isfinite(u)) and np.all(np.isfinite(center))):
        raise ValidationError("non-finite components")
    thr = math.sqrt(2.0 * lam * alpha)
    zero = (center > 0.0) & (center < thr)
    tie = (center == 0.0) | (center == thr)
    d_zero = np.abs(u)
    d_pass = np.abs(u - center)
    d = np.where(zero, d_zero, np.where(tie, np.minimum(d_zero, d_pass), d_pass))
    return float(np.linalg.norm(d))


def subdifferential_member(z, u) -> bool:
    """Whether z lies in the limiting subdifferential of ``||(.)_+||_0`` at u."""
    z = np.asarray(z, dtype=float)
    u = np.asarray(u, dtype=float)
    if z.shape != u.shape:
        raise DimensionMismatchError("z and u must have the same shape")
    nonzero = u != 0.0
    return bool(np.all(z[nonzero] == 0.0) and np.all(z[~nonzero] >= 0.0))


def positive_count(u) -> int:
    """``||u_+||_0``: number of strictly positive components."""
    return int(np.count_nonzero(np.asarray(u) > 0))


@dataclass(frozen=True)
class AlphaThresholds:
    """Step-size thresholds below which the prox fixed point is guaranteed.

    The hat fields are the local-minimizer thresholds of the penalized
    problem; the star fields apply the identical formulas for the constrained
    problem, so the values coincide for a shared (u, z).
    """

    alpha_hat_u: float
    alpha_hat_z: float
    alpha_hat: float
    alpha_star_u: float
    alpha_star_z: float
    alpha_star: float


def alpha_thresholds(u, z, lam: float) -> AlphaThresholds:
    if not (np.isfinite(lam) and lam > 0):
        raise ValidationError("lam must be a positive real")
    u = np.asarray(u, dtype=float)
    z = np.asarray(z, dtype=float)
    pos_u = u[u > 0]
    pos_z = z[z > 0]
    a_u = float(np.min(pos_u) ** 2 / (2.0 * lam)) if pos_u.size else math.inf
    a_z = float(2.0 * lam / np.max(pos_z) ** 2) if pos_z.size else math.inf
    a = min(a_u, a_z)
    return AlphaThresholds(a_u, a_z, a, a_u, a_z, a)


@dataclass(frozen=True)
class StationarityResidual:
    """Residuals of one of the two stationarity systems.

    For the constrained system r_multiplier and r_lyapunov_var are 0 by
    convention; for the penalized system r_feas is 0 by convention (the
    multiplier identity replaces feasibility).
    """

    r_grad: float
    r_prox: float
    r_feas: float
    r_multiplier: float
    r_lyapunov_var: float
    max_residual: float


def _residual(r_grad, r_prox, r_feas, r_multiplier, r_lyapunov_var) -> StationarityResidual:
    vals = (r_grad, r_prox, r_feas, r_multiplier, r_lyapunov_var)
    return StationarityResidual(*vals, max_residual=max(vals))


def _check_dims(problem: CopProblem, w, *n_vectors) -> None:
    if np.asarray(w).shape != (problem.p,):
        raise DimensionMismatchError(f"w must have {problem.p} entries")
    for v in n_vectors:
        if np.asarray(v).shape != (problem.n,):
            raise DimensionMismatchError(f"expected an {problem.n}-vector")


def p_residual(problem: CopProblem, w, u, z, alpha: float) -> StationarityResidual:
    """Residuals of the constrained stationarity system at (w, u, z).

    r_grad = ||grad f(w) + A'z||, r_feas = ||A w + b - u||, and r_prox is the
    distance from u to the prox of (u + alpha z).
    """
    _check_dims(problem, w, u, z)
    _check_scalars(problem.lam, alpha)
    w = np.asarray(w, dtype=float)
    u = np.asarray(u, dtype=float)
    z = np.asarray(z, dtype=float)
    r_grad = float(np.linalg.norm(problem.objective.gradient(w) + problem.A.T @ z))
    r_feas = float(np.linalg.norm(problem.A @ w + problem.b - u))
    r_prox = prox_distance(u, u + alpha * z, problem.lam, alpha)
    return _residual(r_grad, r_prox, r_feas, 0.0, 0.0)


def p_tilde_residual(
    problem: CopProblem, w, u, z, v, z_tilde, mu: float, rho: float, alpha: float
) -> StationarityResidual:
    """Residuals of the fixed-multiplier penalized stationarity system.

    r_multiplier checks the identity z = z_tilde + rho (A w + b - u);
    r_lyapunov_var = ||v - w||; feasibility is 0 by convention.
    """
    _check_dims(problem, w, u, z, z_tilde)
    if np.asarray(v).shape != (problem.p,):
        raise DimensionMismatchError(f"v must have {problem.p} entries")
    _check_scalars(mu, rho)
    w = np.asarray(w, dtype=float)
    u = np.asarray(u, dtype=float)
    z = np.asarray(z, dtype=float)
    v = np.asarray(v, dtype=float)
    z_tilde = np.asarray(z_tilde, dtype=float)
    r_grad = float(
        np.linalg.norm(problem.objective.gradient(w) + mu * (w - v) + problem.A.T @ z)
    )
    r_multiplier = float(
        np.linalg.norm(z - z_tilde - rho * (problem.A @ w + problem.b - u))
    )
    r_prox = prox_distance(u, u + alpha * z, problem.lam, alpha)
    r_lyapunov_var = float(np.linalg.norm(v - w))
    return _residual(r_grad, r_prox, 0.0, r_multiplier, r_lyapunov_var)


@dataclass(frozen=True)
class ExactPenaltyReport:
    is_p_stationary: bool
    is_p_tilde_stationary_at_z: bool
    strongly_exact_back_map: bool
    constrained: StationarityResidual
    penalized: StationarityResidual


def verify_exact_penalty(
    problem: CopProblem, w, u, z, mu: float, rho: float, alpha: float, tol: float
) -> ExactPenaltyReport:
    """Consistency check between the two stationarity systems at (w, u, z).

    The penalized system is evaluated with the fixed multiplier set to z and
    the auxiliary variable set to w (the forward map of the exact-penalty
    result); the back map additionally demands feasibility within tol.
    """
    if not (np.isfinite(tol) and tol > 0):
        raise ValidationError("tol must be a positive real")
    res_p = p_residual(problem, w, u, z, alpha)
    res_pt = p_tilde_residual(problem, w, u, z, w, z, mu, rho, alpha)
    feas = float(np.linalg.norm(problem.A @ np.asarray(w, float) + problem.b - np.asarray(u, float)))
    is_pt = res_pt.max_residual <= tol
    return ExactPenaltyReport(
        is_p_stationary=res_p.max_residual <= tol,
        is_p_tilde_stationary_at_z=is_pt,
        strongly_exact_back_map=bool(is_pt and feas <= tol),
        constrained=res_p,
        penalized=res_pt,
    )
