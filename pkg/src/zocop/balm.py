"""Inner solver: zero-one Bregman alternating linearized minimization.

For fixed (z_k, v_k) the inner problem minimizes the Lyapunov value over
(w, u). The u-step is an exact prox at alpha = 1/rho of the shifted residual
s = A w + b + z_k/rho (computed once and shared with the w-step); the w-step
is one of two linearized updates:

* case1: full Gram Bregman term, works for any smooth f; explicit formula.
* case2: complement-restricted Bregman term for quadratic f; one SPD solve,
  optionally a Woodbury solve in |T|-space when the zeroed set is small.
"""

from __future__ import annotations

import math
from dataclasses import dataclass
from enum import Enum
from typing import List

import numpy as np
import scipy.linalg

from .exceptions import (
    DivergenceError,
    UnsupportedVariantError,
    ValidationError,
)
from .problem import Array, CopProblem, SpectralInfo
from .zeroone import ProxBranch, positive_count, prox_distance, prox_zero_one

EPS_FLOOR = 1e-8


class InnerVariant(str, Enum):
    CASE_I = "case1"
    CASE_II = "case2"


class InnerTermination(str, Enum):
    CRITERIA = "criteria"
    MAX_ITERS = "max_iters"


@dataclass(frozen=True)
class InnerConfig:
    """Inner-solver parameters.

    ``zeta = t - q - l_g`` is the generic descent constant; the variants admit
    larger step ranges, in which case ``descent_constant`` carries the
    case-specific guarantee instead (see default_inner_config).
    """

    variant: InnerVariant
    t: float
    q: float
    l_g: float
    zeta: float
    descent_constant: float
    max_inner_iters: int = 10000
    descent_tolerance: float = 1e-10


def default_inner_config(
    variant: InnerVariant,
    spectral: SpectralInfo,
    mu: float,
    rho: float,
    l_f: float,
    safety: float = 1.01,
    *,
    max_inner_iters: int = 10000,
    descent_tolerance: float = 1e-10,
) -> InnerConfig:
    """Bregman coefficient t per the relaxed case-specific bounds.

    case1: t > (l_f + rho ||A||^2 - mu) / 2, descent constant
    (2t + mu - l_f - rho ||A||^2) / 2. case2: t > (rho ||A||^2 - mu - 1) / 2,
    descent constant (2t + mu + 1 - rho ||A||^2) / 2; the +1 comes from the
    identity Hessian the update was derived for, so for general quadratics the
    recorded constant is guaranteed only when sigma_f >= 1.
    """
    if safety < 1:
        raise ValidationError("safety must be >= 1")
    variant = InnerVariant(variant)
    qa = rho * spectral.norm_A**2
    if variant is InnerVariant.CASE_I:
        q, l_g = qa, l_f
        bound = (l_f + qa - mu) / 2.0
    else:
        q, l_g = qa, 0.0
        bound = (qa - mu - 1.0) / 2.0
    t = safety * max(EPS_FLOOR, bound)
    if variant is InnerVariant.CASE_I:
        kappa = (2.0 * t + mu - l_f - qa) / 2.0
    else:
        kappa = (2.0 * t + mu + 1.0 - qa) / 2.0
    return InnerConfig(
        variant=variant,
        t=t,
        q=q,
        l_g=l_g,
        zeta=t - q - l_g,
        descent_constant=kappa,
        max_inner_iters=max_inner_iters,
        descent_tolerance=descent_tolerance,
    )


def lyapunov_value(problem: CopProblem, w, u, z, v, rho: float, penalty: float) -> float:
    """Augmented Lagrangian plus ``(penalty/2) ||w - v||^2``.

    The zero-one term counts strictly positive components of u.
    """
    w = np.asarray(w, dtype=float)
    u = np.asarray(u, dtype=float)
    z = np.asarray(z, dtype=float)
    v = np.asarray(v, dtype=float)
    r = problem.A @ w + problem.b - u
    dv = w - v
    return float(
        problem.objective.value(w)
        + problem.lam * positive_count(u)
        + z @ r
        + 0.5 * rho * (r @ r)
        + 0.5 * penalty * (dv @ dv)
    )


def grad_w_inner(problem: CopProblem, w, u, z_k, v_k, mu: float, rho: float) -> Array:
    """w-gradient of the smooth part of the inner objective."""
    r = problem.A @ w + problem.b - u + z_k / rho
    return problem.objective.gradient(w) + mu * (w - v_k) + rho * (problem.A.T @ r)


@dataclass(frozen=True)
class UStepResult:
    u_next: Array
    t_set: Array
    tie_set: Array
    s: Array


def u_step(problem: CopProblem, w, z_k, rho: float) -> UStepResult:
    """Exact prox u-update at alpha = 1/rho.

    ``t_set`` is the strict interior set {i : 0 < s_i < sqrt(2 lam / rho)};
    boundary hits take the canonical value 0 as well but are reported in
    ``tie_set``. ``s`` is returned for reuse by the w-step.
    """
    if not (np.isfinite(rho) and rho > 0):
        raise ValidationError("rho must be a positive real")
    w = np.asarray(w, dtype=float)
    z_k = np.asarray(z_k, dtype=float)
    s = problem.A @ w + problem.b + z_k / rho
    prox = prox_zero_one(s, problem.lam, 1.0 / rho)
    return UStepResult(
        u_next=prox.canonical,
        t_set=np.flatnonzero(prox.branch == ProxBranch.ZERO),
        tie_set=np.flatnonzero(prox.branch == ProxBranch.TIE),
        s=s,
    )


def w_step_case1(
    problem: CopProblem, w_prev, v_k, z_k, t_set, s, mu: float, rho: float, t: float
) -> Array:
    """Linearized w-update with the full Gram Bregman term.

    s must be the shifted residual A w_prev + b + z_k/rho already computed by
    the u-step (it embeds the multiplier, so z_k itself is not re-read).
    Cost is O(|t_set| * p) given s.
    """
    w_prev = np.asarray(w_prev, dtype=float)
    v_k = np.asarray(v_k, dtype=float)
    t_set = np.asarray(t_set, dtype=int)
    g = problem.objective.gradient(w_prev)
    if t_set.size:
        g = g + rho * (problem.A[t_set].T @ s[t_set])
    cv = mu / (mu + t)
    cw = t / (t + mu)
    return cv * v_k + cw * w_prev - g / (mu + t)


def w_step_case2(
    problem: CopProblem,
    w_prev,
    v_k,
    z_k,
    t_set,
    mu: float,
    rho: float,
    t: float,
    base_factor=None,
) -> Array:
    """Exact minimizer of the restricted-Bregman model for quadratic f.

    Solves (H + (t+mu) I + rho A_T' A_T) w = mu v_k + t w_prev - c
    - rho A_T' (b + z_k/rho)_T. ``base_factor`` may hold a Cholesky
    factorization of H + (t+mu) I; when given and |T| < p/4 the system is
    solved in |T|-space via a Woodbury update.
    """
    qf = problem.objective.quadratic_form
    if qf is None:
        raise UnsupportedVariantError("case2 w-step needs a quadratic objective")
    w_prev = np.asarray(w_prev, dtype=float)
    v_k = np.asarray(v_k, dtype=float)
    z_k = np.asarray(z_k, dtype=float)
    t_set = np.asarray(t_set, dtype=int)
    p = problem.p
    rhs = mu * v_k + t * w_prev - qf.c
    if t_set.size == 0:
        if base_factor is not None:
            return scipy.linalg.cho_solve(base_factor, rhs)
        M = qf.H + (t + mu) * np.eye(p)
        return scipy.linalg.solve(M, rhs, assume_a="pos")
    AT = problem.A[t_set]
    rhs = rhs - rho * (AT.T @ (problem.b[t_set] + z_k[t_set] / rho))
    if base_factor is not None and t_set.size < p / 4:
        x0 = scipy.linalg.cho_solve(base_factor, rhs)
        Y = scipy.linalg.cho_solve(base_factor, AT.T)
        cap = AT @ Y + np.eye(t_set.size) / rho
        return x0 - Y @ np.linalg.solve(cap, AT @ x0)
    M = qf.H + (t + mu) * np.eye(p) + rho * (AT.T @ AT)
    return scipy.linalg.solve(M, rhs, assume_a="pos")


@dataclass(frozen=True)
class InnerStop:
    passed: bool
    crit_grad: float
    crit_prox: float
    descent_ok: bool
    lyapunov: float


def inner_stopping_check(
    problem: CopProblem,
    w,
    u,
    z_k,
    v_k,
    mu: float,
    rho: float,
    epsilon_k: float,
    lyap_prev_outer: float,
    descent_tolerance: float = 1e-10,
    lyapunov: float | None = None,
) -> InnerStop:
    """Stopping test for one inner iterate at alpha = 1/rho.

    crit_grad is the norm of the inner w-gradient, crit_prox the prox
    fixed-point distance of the u-gradient step, and descent_ok compares the
    Lyapunov value against the outer iterate's within descent_tolerance.
    """
    w = np.asarray(w, dtype=float)
    u = np.asarray(u, dtype=float)
    z_k = np.asarray(z_k, dtype=float)
    v_k = np.asarray(v_k, dtype=float)
    alpha = 1.0 / rho
    crit_grad = float(np.linalg.norm(grad_w_inner(problem, w, u, z_k, v_k, mu, rho)))
    s = problem.A @ w + problem.b + z_k / rho
    crit_prox = prox_distance(u, s, problem.lam, alpha)
    if lyapunov is None:
        lyapunov = lyapunov_value(problem, w, u, z_k, v_k, rho, mu)
    descent_ok = lyapunov <= lyap_prev_outer + descent_tolerance
    passed = bool(descent_ok and max(crit_grad, crit_prox) <= epsilon_k)
    return InnerStop(passed, crit_grad, crit_prox, descent_ok, lyapunov)


@dataclass(frozen=True)
class InnerTraceRow:
    j: int
    lyapunov: float
    step_w: float
    step_u: float
    t_set_size: int
    crit_prox: float
    crit_grad: float


@dataclass(frozen=True)
class BalmResult:
    w: Array
    u: Array
    iterations: int
    trace: List[InnerTraceRow]
    terminated_by: InnerTermination


def balm_solve(
    problem: CopProblem,
    w_start,
    u_start,
    z_k,
    v_k,
    mu: float,
    rho: float,
    epsilon_k: float,
    config: InnerConfig,
) -> BalmResult:
    """Alternate u-step and w-step until the stopping test passes.

    Starts from the outer iterate; a start point that already meets the
    criteria returns immediately (finite epsilon_k only, so a vacuous
    +inf tolerance still performs one full iteration). Exceeding
    max_inner_iters returns MAX_ITERS rather than raising; so does reaching a
    bitwise fixed point or 2-cycle of the (deterministic) iteration map with
    the criteria still unmet, since no further progress is possible then.
    """
    w = np.asarray(w_start, dtype=float).copy()
    u = np.asarray(u_start, dtype=float).copy()
    z_k = np.asarray(z_k, dtype=float)
    v_k = np.asarray(v_k, dtype=float)
    lam, A, b = problem.lam, problem.A, problem.b
    AT = A.T
    value, gradient = problem.objective.value, problem.objective.gradient
    alpha = 1.0 / rho
    thr = math.sqrt(2.0 * lam * alpha)
    z_over_rho = z_k / rho

    # One A @ w per iteration feeds the Lyapunov value, the stopping test,
    # and the next u-step's shifted residual (same float ops as the public
    # u_step / lyapunov_value entry points).
    def measure(w_cur, u_cur):
        Awb = A @ w_cur + b
        r = Awb - u_cur
        dv = w_cur - v_k
        lyap = (
            value(w_cur)
            + lam * positive_count(u_cur)
            + z_k @ r
            + 0.5 * rho * (r @ r)
            + 0.5 * mu * (dv @ dv)
        )
        s_cur = Awb + z_over_rho
        crit_grad = float(
            np.linalg.norm(gradient(w_cur) + mu * dv + rho * (AT @ (s_cur - u_cur)))
        )
        crit_prox = prox_distance(u_cur, s_cur, lam, alpha)
        return float(lyap), s_cur, crit_grad, crit_prox

    v_outer, s, crit_grad, crit_prox = measure(w, u)
    if not math.isfinite(v_outer):
        raise DivergenceError("non-finite Lyapunov value at the inner start")
    trace = [
        InnerTraceRow(
            j=0,
            lyapunov=v_outer,
            step_w=0.0,
            step_u=0.0,
            t_set_size=int(np.count_nonzero((s > 0.0) & (s < thr))),
            crit_prox=crit_prox,
            crit_grad=crit_grad,
        )
    ]
    if max(crit_grad, crit_prox) <= epsilon_k and math.isfinite(epsilon_k):
        return BalmResult(w, u, 0, trace, InnerTermination.CRITERIA)

    base_factor = None
    if config.variant is InnerVariant.CASE_II:
        qf = problem.objective.quadratic_form
        if qf is None:
            raise UnsupportedVariantError("case2 needs a quadratic objective")
        base_factor = scipy.linalg.cho_factor(
            qf.H + (config.t + mu) * np.eye(problem.p)
        )

    w_lag, u_lag = None, None  # iterate from two steps back, for cycle tests
    for j in range(1, config.max_inner_iters + 1):
        # u-step: canonical prox of the shifted residual s(w).
        zero = (s > 0.0) & (s < thr)
        tie = (s == 0.0) | (s == thr)
        u_next = np.where(zero | tie, 0.0, s)
        t_size = int(np.count_nonzero(zero))
        # Self-consistent zeroed set for the w-step: strict interior plus the
        # boundary ties the canonical prox sent to zero.
        active = np.flatnonzero(zero | (tie & (s > 0.0)))
        if config.variant is InnerVariant.CASE_I:
            w_next = w_step_case1(problem, w, v_k, z_k, active, s, mu, rho, config.t)
        else:
            w_next = w_step_case2(
                problem, w, v_k, z_k, active, mu, rho, config.t, base_factor
            )
        step_w = float(np.linalg.norm(w_next - w))
        step_u = float(np.linalg.norm(u_next - u))
        stalled = (step_w == 0.0 and step_u == 0.0) or (
            w_lag is not None
            and np.array_equal(w_next, w_lag)
            and np.array_equal(u_next, u_lag)
        )
        w_lag, u_lag = w, u
        w, u = w_next, u_next
        lyap, s, crit_grad, crit_prox = measure(w, u)
        if not math.isfinite(lyap):
            raise DivergenceError("inner Lyapunov value became non-finite")
        trace.append(
            InnerTraceRow(
                j=j,
                lyapunov=lyap,
                step_w=step_w,
                step_u=step_u,
                t_set_size=t_size,
                crit_prox=crit_prox,
                crit_grad=crit_grad,
            )
        )
        descent_ok = lyap <= v_outer + config.descent_tolerance
        if descent_ok and max(crit_grad, crit_prox) <= epsilon_k:
            return BalmResult(w, u, j, trace, InnerTermination.CRITERIA)
        if stalled:
            return BalmResult(w, u, j, trace, InnerTermination.MAX_ITERS)
    return BalmResult(w, u, config.max_inner_iters, trace, InnerTermination.MAX_ITERS)
