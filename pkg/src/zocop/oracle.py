"""Independent brute-force references.

Nothing here shares numerics with the solvers: the prox oracle is a dense
grid search, the stationary-point enumeration solves small equality-KKT
systems over all active sets, and the strong-convexity constant is checked
empirically on random point pairs. These are the second route of every
dual-route check in the test suite.
"""

from __future__ import annotations

import math
from dataclasses import dataclass
from typing import List

import numpy as np
import scipy.linalg

from .exceptions import ValidationError
from .problem import Array, CopProblem
from .zeroone import StationarityResidual, p_residual, positive_count

MAX_ENUM_N = 14


@dataclass(frozen=True)
class ProxOracleResult:
    argmin_set: Array
    min_value: float


def prox_oracle(
    center: float, lam: float, alpha: float, grid_step: float = 1e-4
) -> ProxOracleResult:
    """Grid minimizer of ``g(t) = lam * [t > 0] + (t - center)^2 / (2 alpha)``.

    The grid spans center +- (3 sqrt(2 lam alpha) + 1) and is augmented with
    the exact candidates {0, center}; every point within 1e-12 of the minimum
    is reported.
    """
    if grid_step <= 0 or grid_step > 1e-3:
        raise ValidationError("grid_step must lie in (0, 1e-3]")
    thr = math.sqrt(2.0 * lam * alpha)
    lo = center - 3.0 * thr - 1.0
    hi = center + 3.0 * thr + 1.0
    grid = np.arange(lo, hi + grid_step, grid_step)
    cand = np.concatenate([grid, [0.0, float(center)]])
    g = lam * (cand > 0.0) + (cand - center) ** 2 / (2.0 * alpha)
    min_value = float(g.min())
    argmin = np.unique(cand[g <= min_value + 1e-12])
    return ProxOracleResult(argmin, min_value)


@dataclass(frozen=True)
class StationaryCandidate:
    """One feasible stationary triplet found by enumeration.

    ``u`` carries the active-set components as exact zeros; ``sign_pattern``
    is the set {i : u_i <= 0} the triplet certifies. ``objective`` counts the
    zero-one term structurally (off-active positives only), so it is exact.
    """

    w: Array
    u: Array
    z: Array
    sign_pattern: frozenset
    objective: float
    residual: StationarityResidual


def enumerate_stationary(
    problem: CopProblem, alpha: float, tol: float, dedup_tol: float = 1e-8
) -> List[StationaryCandidate]:
    """All stationary triplets of a strongly convex quadratic instance.

    For each active set E the equality-constrained KKT system is solved; the
    multipliers must be nonnegative, and the full stationarity residual at
    ``alpha`` filters out candidates whose inactive components fall in the
    forbidden band (0, sqrt(2 lam alpha)). Work is 2^n, capped at n = 14.
    """
    qf = problem.objective.quadratic_form
    if qf is None:
        raise ValidationError("enumeration needs a quadratic objective")
    evals = np.linalg.eigvalsh(qf.H)
    if evals[0] <= 0:
        raise ValidationError("enumeration needs H positive definite")
    n, p = problem.n, problem.p
    if n > MAX_ENUM_N:
        raise ValidationError(f"enumeration is capped at n <= {MAX_ENUM_N}, got {n}")
    if tol <= 0:
        raise ValidationError("tol must be positive")
    H, c, A, b = qf.H, qf.c, problem.A, problem.b

    found: List[StationaryCandidate] = []
    for mask in range(2**n):
        E = [i for i in range(n) if mask >> i & 1]
        m = len(E)
        if m:
            AE = A[E]
            kkt = np.block([[H, AE.T], [AE, np.zeros((m, m))]])
            rhs = np.concatenate([-c, -b[E]])
            try:
                sol = np.linalg.solve(kkt, rhs)
            except np.linalg.LinAlgError:
                continue  # dependent active rows; covered by a subset of E
            if not np.all(np.isfinite(sol)):
                continue
            w, nu = sol[:p], sol[p:]
            if np.any(nu < -1e-10):
                continue
            z = np.zeros(n)
            z[E] = np.maximum(nu, 0.0)
        else:
            w = np.linalg.solve(H, -c)
            z = np.zeros(n)
        u = A @ w + b
        u[E] = 0.0  # active constraints hold exactly; canonical form
        res = p_residual(problem, w, u, z, alpha)
        if res.max_residual > tol:
            continue
        pattern = frozenset(i for i in range(n) if u[i] <= 0.0)
        objective = problem.objective.value(w) + problem.lam * positive_count(u)
        found.append(StationaryCandidate(w, u, z, pattern, objective, res))

    found.sort(key=lambda cand: (cand.objective, tuple(sorted(cand.sign_pattern))))
    unique: List[StationaryCandidate] = []
    for cand in found:
        if all(np.linalg.norm(cand.w - kept.w) > dedup_tol for kept in unique):
            unique.append(cand)
    return unique


@dataclass(frozen=True)
class SigmaCheck:
    sigma: float
    holds: bool
    worst_violation: float


def verify_sigma_constant(
    sigma_f: float,
    rho: float,
    mu: float,
    norm_A: float,
    trials: int,
    seed: int = 0,
    n: int = 4,
    p: int = 6,
) -> SigmaCheck:
    """Strong-convexity constant of the fixed-multiplier smooth part.

    sigma = sigma_f rho mu / (sigma_f (mu + rho) + rho mu ||A||^2 + 2 rho mu).
    The inequality is checked on random point pairs for a random A scaled to
    the given norm and f = (sigma_f / 2) ||w||^2; holds means no violation
    beyond 1e-8.
    """
    if min(sigma_f, rho, mu, norm_A) <= 0:
        raise ValidationError("all parameters must be positive")
    sigma = sigma_f * rho * mu / (sigma_f * (mu + rho) + rho * mu * norm_A**2 + 2 * rho * mu)
    rng = np.random.default_rng(seed)
    A = rng.standard_normal((n, p))
    A *= norm_A / scipy.linalg.svdvals(A)[0]
    b = rng.standard_normal(n)
    z_tilde = rng.standard_normal(n)

    def h(w, u, v):
        r = A @ w + b - u
        return (
            0.5 * sigma_f * w @ w
            + 0.5 * mu * np.sum((w - v) ** 2)
            + z_tilde @ r
            + 0.5 * rho * r @ r
        )

    def grad(w, u, v):
        r = A @ w + b - u
        gw = sigma_f * w + mu * (w - v) + rho * (A.T @ (r + z_tilde / rho))
        gu = rho * (u - A @ w - b - z_tilde / rho)
        gv = mu * (v - w)
        return gw, gu, gv

    worst = 0.0
    for _ in range(trials):
        w, wb = rng.standard_normal((2, p)) * 2.0
        u, ub = rng.standard_normal((2, n)) * 2.0
        v, vb = rng.standard_normal((2, p)) * 2.0
        gw, gu, gv = grad(wb, ub, vb)
        gap = (
            h(w, u, v)
            - h(wb, ub, vb)
            - gw @ (w - wb)
            - gu @ (u - ub)
            - gv @ (v - vb)
            - 0.5
            * sigma
            * (np.sum((w - wb) ** 2) + np.sum((u - ub) ** 2) + np.sum((v - vb) ** 2))
        )
        if -gap > worst:
            worst = -gap
    return SigmaCheck(sigma=sigma, holds=worst <= 1e-8, worst_violation=worst)
