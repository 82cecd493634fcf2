"""Outer inexact augmented Lagrangian loop with merit diagnostics.

Each outer iteration runs the inner solver to the epsilon_k criteria, applies
the multiplier update z <- z + rho (A w + b - u), refreshes the auxiliary
variable v <- w, and shrinks epsilon geometrically. Termination is a
stationarity certificate: residuals of the constrained system below
tol_outer together with feasibility below tol_feas.

The diagnostic merit recorded per iterate is V_{rho,beta}(w^k, u^k, z^k,
v^{k-1}) + eta * epsilon_{k-1}^2, which decreases by at least (mu/4) * step_w^2
under the certified parameter rules; bookkeeping starts at k = 1 (the 0 -> 1
transition is unchecked, v^0 coming from the initialization).
"""

from __future__ import annotations

import math
import warnings
from dataclasses import dataclass, replace
from enum import Enum
from typing import Callable, List, Optional

import numpy as np

from .balm import (
    InnerConfig,
    InnerTraceRow,
    InnerVariant,
    balm_solve,
    default_inner_config,
    lyapunov_value,
)
from .exceptions import DivergenceError, RankDeficiencyError, ValidationError
from .problem import Array, CopProblem, SpectralInfo, spectral_info
from .zeroone import StationarityResidual, p_residual, positive_count


@dataclass(frozen=True)
class OuterConfig:
    """All outer-loop parameters.

    alpha is stored once as fl(1/rho) and reused verbatim everywhere (inner
    solver, residuals, certificate) so threshold comparisons never drift.
    """

    mu: float
    rho: float
    alpha: float
    beta: float
    eta: float
    tau: float
    c1: float
    c2: float
    gamma: float
    epsilon0: float
    epsilon_ratio: float
    tol_outer: float = 1e-6
    tol_feas: float = 1e-6
    max_outer: int = 500
    strict_rank: bool = True
    certified: bool = True


def rho_lower_bound(gamma: float, l_f: float, mu: float) -> float:
    """Certified penalty threshold max{16 (c1^2 + c2^2) / mu, 6 l_f / gamma^2}."""
    c1 = (mu + l_f) / gamma
    c2 = mu / gamma
    return max(16.0 * (c1**2 + c2**2) / mu, 6.0 * l_f / gamma**2)


def derive_parameters(
    spectral: SpectralInfo,
    l_f: float,
    mu: float = 1.0,
    safety: float = 1.01,
    epsilon0: float = 1.0,
    *,
    rho: float | None = None,
    eta: float | None = None,
    tol_outer: float = 1e-6,
    tol_feas: float = 1e-6,
    max_outer: int = 500,
    strict_rank: bool = True,
    certified: bool = True,
) -> OuterConfig:
    """Certified parameter rules given mu.

    rho defaults to safety times its lower bound, eta to twice its own lower
    bound 4/(rho gamma^2) (so rho gamma^2 eta = 8), and the epsilon ratio sits
    exactly on the admissible bound — the slowest decay, minimizing inner work
    per outer step. Overrides below the bounds are rejected in certified mode.
    """
    if spectral.gamma <= 0.0:
        raise RankDeficiencyError(
            "A is rank deficient (gamma = 0); certified parameters are undefined. "
            "Use practical_parameters with an explicit rho for an uncertified run."
        )
    if not spectral.full_row_rank:
        if strict_rank:
            raise RankDeficiencyError("A is not full row rank within tolerance")
        warnings.warn(
            "A is not full row rank within tolerance; proceeding, but the "
            "convergence guarantees are void",
            RuntimeWarning,
            stacklevel=2,
        )
    if mu <= 0:
        raise ValidationError("mu must be positive")
    if epsilon0 <= 0:
        raise ValidationError("epsilon0 must be positive")
    gamma = spectral.gamma
    c1 = (mu + l_f) / gamma
    c2 = mu / gamma
    bound = rho_lower_bound(gamma, l_f, mu)
    if rho is None:
        if safety <= 1:
            raise ValidationError("safety must be > 1")
        rho = safety * bound
    elif certified and rho <= bound:
        raise ValidationError(
            f"certified mode needs rho > {bound:.6g}, got {rho:.6g}"
        )
    if rho <= 0:
        raise ValidationError("rho must be positive")
    eta_bound = 4.0 / (rho * gamma**2)
    if eta is None:
        eta = 2.0 * eta_bound
    elif certified and eta <= eta_bound:
        raise ValidationError(
            f"certified mode needs eta > {eta_bound:.6g}, got {eta:.6g}"
        )
    rge = rho * gamma**2 * eta
    if rge <= 4.0:
        raise ValidationError("rho * gamma^2 * eta must exceed 4 for the epsilon rule")
    ratio = math.sqrt((rge - 4.0) / (rge + 4.0))
    return OuterConfig(
        mu=mu,
        rho=rho,
        alpha=1.0 / rho,
        beta=8.0 * c2**2 / rho,
        eta=eta,
        tau=mu / 4.0,
        c1=c1,
        c2=c2,
        gamma=gamma,
        epsilon0=epsilon0,
        epsilon_ratio=ratio,
        tol_outer=tol_outer,
        tol_feas=tol_feas,
        max_outer=max_outer,
        strict_rank=strict_rank,
        certified=certified and rho > bound and eta > eta_bound,
    )


def practical_parameters(
    mu: float,
    rho: float,
    epsilon0: float = 1.0,
    *,
    eta: float = 1.0,
    epsilon_ratio: float = 0.5,
    beta: float | None = None,
    gamma: float = math.nan,
    tol_outer: float = 1e-6,
    tol_feas: float = 1e-6,
    max_outer: int = 500,
) -> OuterConfig:
    """Uncertified parameters with user-chosen rho.

    Intended for rank-deficient A or exploratory runs; descent diagnostics
    become advisory. beta defaults to mu for the merit bookkeeping. gamma is
    NaN when unknown; pass 0.0 only for a known rank-deficient A (the solve
    report then flags non-converged runs as rank deficient).
    """
    if mu <= 0 or rho <= 0 or epsilon0 <= 0 or eta <= 0:
        raise ValidationError("mu, rho, epsilon0, eta must be positive")
    if not (0.0 < epsilon_ratio < 1.0):
        raise ValidationError("epsilon_ratio must lie in (0, 1)")
    return OuterConfig(
        mu=mu,
        rho=rho,
        alpha=1.0 / rho,
        beta=mu if beta is None else beta,
        eta=eta,
        tau=mu / 4.0,
        c1=mu / gamma if gamma > 0 else math.nan,
        c2=mu / gamma if gamma > 0 else math.nan,
        gamma=gamma,
        epsilon0=epsilon0,
        epsilon_ratio=epsilon_ratio,
        tol_outer=tol_outer,
        tol_feas=tol_feas,
        max_outer=max_outer,
        strict_rank=False,
        certified=False,
    )


def multiplier_step(z, rho: float, residual) -> Array:
    """z + rho * residual, the dual ascent update at feasibility residual."""
    return np.asarray(z, dtype=float) + rho * np.asarray(residual, dtype=float)


@dataclass(frozen=True)
class IterateState:
    """One outer iterate: primal pair, multiplier, auxiliary variable."""

    w: Array
    u: Array
    z: Array
    v: Array

    def __post_init__(self):
        for name in ("w", "u", "z", "v"):
            object.__setattr__(self, name, np.asarray(getattr(self, name), dtype=float))


def default_init(problem: CopProblem) -> IterateState:
    """w = 0, u = b (feasible at w = 0), z = 0, v = 0."""
    return IterateState(
        w=np.zeros(problem.p),
        u=problem.b.copy(),
        z=np.zeros(problem.n),
        v=np.zeros(problem.p),
    )


@dataclass(frozen=True)
class IterationRecord:
    """Per-outer-iterate diagnostics.

    epsilon_k is the inner tolerance used by the primal step that produced
    this iterate. step_z is recorded as rho * feas, which is the multiplier
    update identity and therefore exact by construction.
    """

    k: int
    lyapunov_beta: float
    merit: float
    step_w: float
    step_u: float
    step_z: float
    feas: float
    p_residual_max: float
    epsilon_k: float
    inner_iterations: int
    zero_one_loss: int
    f_value: float


class SolveStatus(str, Enum):
    P_STATIONARY = "p_stationary"
    MAX_ITERS = "max_iters"
    RANK_DEFICIENT = "rank_deficient"
    DIVERGED = "diverged"


@dataclass(frozen=True)
class SolveReport:
    final: IterateState
    status: SolveStatus
    trace: List[IterationRecord]
    certificate: StationarityResidual
    objective: float


def ialm_solve(
    problem: CopProblem,
    init: IterateState,
    outer: OuterConfig,
    inner: InnerConfig,
    trace_sink: Optional[Callable[[IterationRecord], None]] = None,
    inner_trace_sink: Optional[Callable[[int, List[InnerTraceRow]], None]] = None,
) -> SolveReport:
    """Run the outer loop from ``init``.

    The termination test precedes iteration, so a stationary start returns at
    k = 0. Divergence (non-finite merit) is reported in the status, not
    raised. ``trace_sink`` receives each IterationRecord as it is produced;
    ``inner_trace_sink`` receives (k, inner trace rows) after each primal step.
    """
    w, u, z, v = init.w.copy(), init.u.copy(), init.z.copy(), init.v.copy()
    alpha = outer.alpha
    res = p_residual(problem, w, u, z, alpha)
    records: List[IterationRecord] = []
    if res.max_residual <= outer.tol_outer and res.r_feas <= outer.tol_feas:
        return SolveReport(
            final=IterateState(w, u, z, v),
            status=SolveStatus.P_STATIONARY,
            trace=records,
            certificate=res,
            objective=problem.objective.value(w) + problem.lam * positive_count(u),
        )

    eps = outer.epsilon0
    status = SolveStatus.MAX_ITERS
    for k in range(1, outer.max_outer + 1):
        v_lag = v  # v^{k-1} for the diagnostic Lyapunov
        try:
            result = balm_solve(problem, w, u, z, v, outer.mu, outer.rho, eps, inner)
        except DivergenceError:
            status = SolveStatus.DIVERGED
            break
        if inner_trace_sink is not None:
            inner_trace_sink(k, result.trace)
        w_next, u_next = result.w, result.u
        feas_vec = problem.A @ w_next + problem.b - u_next
        z_next = multiplier_step(z, outer.rho, feas_vec)
        feas = float(np.linalg.norm(feas_vec))
        res = p_residual(problem, w_next, u_next, z_next, alpha)
        lyap_beta = lyapunov_value(
            problem, w_next, u_next, z_next, v_lag, outer.rho, outer.beta
        )
        rec = IterationRecord(
            k=k,
            lyapunov_beta=lyap_beta,
            merit=lyap_beta + outer.eta * eps**2,
            step_w=float(np.linalg.norm(w_next - w)),
            step_u=float(np.linalg.norm(u_next - u)),
            step_z=outer.rho * feas,
            feas=feas,
            p_residual_max=res.max_residual,
            epsilon_k=eps,
            inner_iterations=result.iterations,
            zero_one_loss=positive_count(u_next),
            f_value=problem.objective.value(w_next),
        )
        records.append(rec)
        if trace_sink is not None:
            trace_sink(rec)
        w, u, z, v = w_next, u_next, z_next, w_next
        if not math.isfinite(rec.merit):
            status = SolveStatus.DIVERGED
            break
        if res.max_residual <= outer.tol_outer and feas <= outer.tol_feas:
            status = SolveStatus.P_STATIONARY
            break
        eps = outer.epsilon_ratio * eps

    if status is not SolveStatus.P_STATIONARY and outer.gamma == 0.0:
        status = SolveStatus.RANK_DEFICIENT
    return SolveReport(
        final=IterateState(w, u, z, v),
        status=status,
        trace=records,
        certificate=res,
        objective=problem.objective.value(w) + problem.lam * positive_count(u),
    )


@dataclass(frozen=True)
class DescentReport:
    holds: bool
    worst_violation: float
    first_violation_k: Optional[int]
    final_steps_small: bool
    final_step_max: float
    merit_consistent: bool


def verify_descent_trace(
    trace: List[IterationRecord],
    tau: float,
    eta: float | None,
    slack: float = 1e-9,
    step_tol: float = 1e-5,
) -> DescentReport:
    """Check merit decrease by at least tau * step_w^2 between iterates.

    Also reports whether the final step_w/step_u/step_z are below step_tol
    (the vanishing-differences property of converged runs). When eta is given
    the stored merit is cross-checked against lyapunov_beta + eta * eps^2.
    """
    if len(trace) < 2:
        raise ValidationError("trace must contain at least two records")
    worst = 0.0
    first: Optional[int] = None
    merit_consistent = True
    for prev, nxt in zip(trace, trace[1:]):
        if eta is not None:
            merit_consistent &= nxt.merit == nxt.lyapunov_beta + eta * nxt.epsilon_k**2
        violation = tau * nxt.step_w**2 - (prev.merit - nxt.merit)
        if violation > worst:
            worst = violation
        if violation > slack and first is None:
            first = nxt.k
    last = trace[-1]
    final_step_max = max(last.step_w, last.step_u, last.step_z)
    return DescentReport(
        holds=worst <= slack,
        worst_violation=worst,
        first_violation_k=first,
        final_steps_small=final_step_max <= step_tol,
        final_step_max=final_step_max,
        merit_consistent=merit_consistent,
    )


def solve_problem(
    problem: CopProblem,
    mu: float = 1.0,
    *,
    safety: float = 1.01,
    variant: InnerVariant | str | None = None,
    epsilon0: float | None = None,
    rho: float | None = None,
    eta: float | None = None,
    t: float | None = None,
    tol_outer: float = 1e-6,
    tol_feas: float = 1e-6,
    max_outer: int = 500,
    max_inner: int = 10000,
    mode: str = "certified",
    strict_rank: bool = True,
    init: IterateState | None = None,
    trace_sink: Optional[Callable[[IterationRecord], None]] = None,
) -> SolveReport:
    """Derive parameters for ``problem`` and run the outer loop.

    epsilon0 defaults to 1 + ||grad f(w0)||, which avoids vacuous first
    criteria on badly scaled problems. In practical mode rho is free (and
    required when A is rank deficient); descent checks become advisory.
    """
    if mode not in ("certified", "practical"):
        raise ValidationError("mode must be 'certified' or 'practical'")
    obj = problem.objective
    spec = spectral_info(problem.A)
    if variant is None:
        variant = (
            InnerVariant.CASE_II if obj.quadratic_form is not None else InnerVariant.CASE_I
        )
    variant = InnerVariant(variant)
    if init is None:
        init = default_init(problem)
    if epsilon0 is None:
        epsilon0 = 1.0 * (1.0 + float(np.linalg.norm(obj.gradient(init.w))))

    certified = mode == "certified"
    if spec.gamma > 0.0:
        outer = derive_parameters(
            spec,
            obj.lipschitz_l_f,
            mu,
            safety,
            epsilon0,
            rho=rho,
            eta=eta,
            tol_outer=tol_outer,
            tol_feas=tol_feas,
            max_outer=max_outer,
            strict_rank=strict_rank and certified,
            certified=certified,
        )
    else:
        if certified or rho is None:
            raise RankDeficiencyError(
                "A is rank deficient; use mode='practical' with an explicit rho"
            )
        warnings.warn(
            "A is rank deficient; running uncertified with user-chosen rho",
            RuntimeWarning,
            stacklevel=2,
        )
        outer = practical_parameters(
            mu,
            rho,
            epsilon0,
            eta=eta if eta is not None else 1.0,
            gamma=0.0,
            tol_outer=tol_outer,
            tol_feas=tol_feas,
            max_outer=max_outer,
        )
    inner = default_inner_config(
        variant, spec, mu, outer.rho, obj.lipschitz_l_f, safety,
        max_inner_iters=max_inner,
    )
    if t is not None:
        if certified and t < inner.t / safety:
            raise ValidationError(
                f"certified mode needs t > {inner.t / safety:.6g}, got {t:.6g}"
            )
        inner = replace(
            inner,
            t=t,
            zeta=t - inner.q - inner.l_g,
            descent_constant=(
                (2 * t + mu - obj.lipschitz_l_f - inner.q) / 2
                if variant is InnerVariant.CASE_I
                else (2 * t + mu + 1 - inner.q) / 2
            ),
        )
    return ialm_solve(problem, init, outer, inner, trace_sink=trace_sink)
