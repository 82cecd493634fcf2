"""Shared instance generators for the test suite."""

import numpy as np

import zocop


def one_dim_problem(lam=10.0):
    """f = w^2/2, A = [1], b = (-1): unique stationary triplet (0, -1, 0)."""
    return zocop.CopProblem(
        zocop.quadratic_objective(np.eye(1), np.zeros(1)),
        np.array([[1.0]]),
        np.array([-1.0]),
        lam,
    )


def random_quadratic_instance(seed, n_range=(3, 11), p_max=20,
                              sv_range=(0.9, 1.1), eig_range=(1.0, 2.0)):
    """Well-conditioned strongly convex quadratic instance with full-row-rank A."""
    rng = np.random.default_rng(seed)
    n = int(rng.integers(*n_range))
    p = int(rng.integers(n, p_max + 1))
    U, _ = np.linalg.qr(rng.standard_normal((n, n)))
    V, _ = np.linalg.qr(rng.standard_normal((p, n)))
    A = U @ np.diag(rng.uniform(*sv_range, n)) @ V.T
    Q, _ = np.linalg.qr(rng.standard_normal((p, p)))
    H = Q @ np.diag(rng.uniform(*eig_range, p)) @ Q.T
    H = 0.5 * (H + H.T)
    c = rng.standard_normal(p) * 0.5
    if np.linalg.norm(c) < 0.1:
        c[0] += 0.5
    b = rng.standard_normal(n)
    lam = float(rng.uniform(0.5, 5.0))
    return zocop.CopProblem(zocop.quadratic_objective(H, c), A, b, lam)


def separable_svm_data(seed=7, n=40, lift=2.0):
    """2-D linearly separable labels with margin >= 0.5 about a hyperplane
    through the origin, lifted by an identity block so the margin matrix has
    full row rank with n <= p."""
    rng = np.random.default_rng(seed)
    d = rng.normal(size=2)
    d /= np.linalg.norm(d)
    y = np.concatenate([np.ones(n // 2), -np.ones(n // 2)])
    X2 = np.empty((n, 2))
    for i in range(n):
        offset = rng.uniform(0.5, 1.2)
        perp = rng.normal(size=2)
        perp -= (perp @ d) * d
        X2[i] = y[i] * offset * d + 0.4 * perp
    X = np.hstack([X2, lift * np.eye(n)])
    assert np.min(y * (X2 @ d)) >= 0.5
    return zocop.LabeledDataset(X, y=y)


def monotone_mrc_data(seed=5, n=15, lift=2.0):
    """Regression rows whose first feature is a strictly increasing driver:
    w* = e_1 gives scores with gaps 0.2 > xi."""
    rng = np.random.default_rng(seed)
    t = np.linspace(0.0, 2.8, n)
    X = np.hstack([t[:, None], lift * np.eye(n)])
    y = np.sort(t + 0.02 * rng.standard_normal(n))
    return X, y


def write_libsvm(path, data):
    with open(path, "w") as fh:
        for i in range(data.X.shape[0]):
            feats = " ".join(
                f"{j + 1}:{data.X[i, j]:.17g}"
                for j in range(data.X.shape[1])
                if data.X[i, j] != 0.0
            )
            fh.write(f"{int(data.y[i]):+d} {feats}\n")
