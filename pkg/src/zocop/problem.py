"""Problem containers and spectral helpers.

The model is ``min_w f(w) + lam * ||(A w + b)_+||_0`` with a smooth f. The
containers here are immutable and shared by the inner/outer solvers, the
stationarity certificates, and the brute-force oracles.
"""

from __future__ import annotations

from dataclasses import dataclass
from typing import Callable, Optional

import numpy as np
import scipy.linalg

from .exceptions import DimensionMismatchError, InvalidObjectiveError, ValidationError

Array = np.ndarray


def _readonly(a, dtype=float) -> Array:
    out = np.array(a, dtype=dtype)
    if out.size == 0:
        raise ValidationError("empty array")
    if not np.all(np.isfinite(out)):
        raise ValidationError("array has non-finite entries")
    out.flags.writeable = False
    return out


@dataclass(frozen=True)
class QuadraticForm:
    """Dense quadratic data ``f(w) = 0.5 w'Hw + c'w + d`` with symmetric H."""

    H: Array
    c: Array
    d: float = 0.0

    def __post_init__(self):
        H = _readonly(self.H)
        c = _readonly(self.c)
        if H.ndim != 2 or H.shape[0] != H.shape[1]:
            raise DimensionMismatchError(f"H must be square, got {H.shape}")
        if c.ndim != 1 or c.shape[0] != H.shape[0]:
            raise DimensionMismatchError("c must be a vector matching H")
        if not np.allclose(H, H.T, rtol=1e-10, atol=1e-12):
            raise ValidationError("H must be symmetric")
        object.__setattr__(self, "H", H)
        object.__setattr__(self, "c", c)
        object.__setattr__(self, "d", float(self.d))

    @property
    def dim(self) -> int:
        return self.H.shape[0]


@dataclass(frozen=True)
class SmoothObjective:
    """Smooth term f with its gradient and smoothness constants.

    ``lipschitz_l_f`` is the gradient Lipschitz constant and must be supplied
    by the caller for non-quadratic f (estimating it for a black box is
    unreliable). ``strong_convexity_sigma_f`` is 0 when unknown or absent.
    """

    value: Callable[[Array], float]
    gradient: Callable[[Array], Array]
    lipschitz_l_f: float
    strong_convexity_sigma_f: float = 0.0
    quadratic_form: Optional[QuadraticForm] = None

    def __post_init__(self):
        if self.lipschitz_l_f < 0 or not np.isfinite(self.lipschitz_l_f):
            raise ValidationError("lipschitz_l_f must be a nonnegative real")
        if self.strong_convexity_sigma_f < 0:
            raise ValidationError("strong_convexity_sigma_f must be nonnegative")


def quadratic_objective(
    H, c=None, d: float = 0.0, *, l_f: float | None = None, sigma_f: float | None = None
) -> SmoothObjective:
    """Build the objective ``f(w) = 0.5 w'Hw + c'w + d``.

    Constants are taken from the eigenvalues of H unless supplied: l_f is the
    largest eigenvalue magnitude, sigma_f the smallest eigenvalue clamped at 0.
    """
    H = np.asarray(H, dtype=float)
    if c is None:
        c = np.zeros(H.shape[0])
    form = QuadraticForm(H, c, d)
    if l_f is None or sigma_f is None:
        evals = np.linalg.eigvalsh(form.H)
        if l_f is None:
            l_f = float(np.max(np.abs(evals)))
        if sigma_f is None:
            sigma_f = float(max(0.0, evals[0]))

    def value(w: Array) -> float:
        return float(0.5 * w @ (form.H @ w) + form.c @ w + form.d)

    def gradient(w: Array) -> Array:
        return form.H @ w + form.c

    return SmoothObjective(value, gradient, l_f, sigma_f, form)


@dataclass(frozen=True)
class CopProblem:
    """One instance of ``min f(w) + lam * ||(A w + b)_+||_0``."""

    objective: SmoothObjective
    A: Array
    b: Array
    lam: float

    def __post_init__(self):
        A = _readonly(self.A)
        b = _readonly(self.b)
        if A.ndim != 2:
            raise DimensionMismatchError("A must be a matrix")
        if b.ndim != 1 or b.shape[0] != A.shape[0]:
            raise DimensionMismatchError(
                f"b has {b.shape} entries for A with {A.shape[0]} rows"
            )
        if not (np.isfinite(self.lam) and self.lam > 0):
            raise ValidationError("lam must be a positive real")
        qf = self.objective.quadratic_form
        if qf is not None and qf.dim != A.shape[1]:
            raise DimensionMismatchError("quadratic form dimension does not match A")
        object.__setattr__(self, "A", A)
        object.__setattr__(self, "b", b)
        object.__setattr__(self, "lam", float(self.lam))

    @property
    def n(self) -> int:
        return self.A.shape[0]

    @property
    def p(self) -> int:
        return self.A.shape[1]


@dataclass(frozen=True)
class SpectralInfo:
    """Largest singular value of A and gamma = sqrt(theta_min(A A'))."""

    norm_A: float
    gamma: float
    full_row_rank: bool
    rank_tolerance: float


def spectral_info(A, rank_tolerance: float | None = None) -> SpectralInfo:
    """Spectral quantities of A.

    gamma is the smallest singular value when n <= p and exactly 0 otherwise
    (A A' is then singular). Rank deficiency is reported, never raised; the
    default tolerance is 1e-10 * norm_A**2, a scale-invariant rank decision.
    """
    A = np.asarray(A, dtype=float)
    if A.ndim != 2 or A.size == 0:
        raise ValidationError("A must be a nonempty matrix")
    s = scipy.linalg.svdvals(A)
    norm_A = float(s[0])
    n, p = A.shape
    gamma = float(s[-1]) if n <= p else 0.0
    tol = float(rank_tolerance) if rank_tolerance is not None else 1e-10 * norm_A**2
    return SpectralInfo(norm_A, gamma, gamma > tol, tol)


def check_gradient(obj: SmoothObjective, w, step: float) -> float:
    """Max per-coordinate relative error of a central difference vs gradient(w).

    Relative error per coordinate is |fd_i - g_i| / max(1, |g_i|).
    """
    w = np.asarray(w, dtype=float)
    if not (step > 0 and np.isfinite(step)):
        raise ValidationError("step must be a positive real")
    g = np.asarray(obj.gradient(w), dtype=float)
    f0 = obj.value(w)
    if not (np.all(np.isfinite(g)) and np.isfinite(f0)):
        raise InvalidObjectiveError("non-finite value or gradient")
    worst = 0.0
    for i in range(w.shape[0]):
        e = np.zeros_like(w)
        e[i] = step
        fd = (obj.value(w + e) - obj.value(w - e)) / (2.0 * step)
        if not np.isfinite(fd):
            raise InvalidObjectiveError("non-finite value near w")
        worst = max(worst, abs(fd - g[i]) / max(1.0, abs(g[i])))
    return worst
