"""Nonnegative factorization primitives.

All solvers use multiplicative updates for the half-squared Frobenius
objective; the update is monotone, so the per-iteration objective sequence is
non-increasing (asserted by tests, not here).
"""

import numpy as np

from .validation import check_non_negative

_EPS = 1e-12


def frobenius_objective(V, G, F):
    return 0.5 * np.linalg.norm(V - G @ F) ** 2


def nmf_factorize(V, r, tol=1e-6, max_iter=500, seed=0, restarts=1,
                  return_history=False):
    """Factorize ``V ~ G @ F`` with G, F >= 0.

    Initialization is seeded uniform(0, 1]; with ``restarts > 1`` the best
    objective over seeds ``seed .. seed+restarts-1`` wins.  Stops when the
    relative objective decrease falls below ``tol``.
    """
    V = check_non_negative(V, "V")
    n, f = V.shape
    if not (0 < r < min(n, f)):
        raise ValueError(f"r must satisfy 0 < r < min(n, f)={min(n, f)}, got {r}")
    best = None
    for k in range(restarts):
        rng = np.random.default_rng(seed + k)
        G = 1.0 - rng.random((n, r))  # uniform (0, 1]
        F = 1.0 - rng.random((r, f))
        history = [frobenius_objective(V, G, F)]
        for _ in range(max_iter):
            G *= (V @ F.T) / (G @ (F @ F.T) + _EPS)
            F *= (G.T @ V) / ((G.T @ G) @ F + _EPS)
            obj = frobenius_objective(V, G, F)
            history.append(obj)
            prev = history[-2]
            if prev - obj < tol * max(prev, _EPS):
                break
        if best is None or history[-1] < best[2][-1]:
            best = (G, F, history)
    G, F, history = best
    if return_history:
        return G, F, history
    return G, F


def nnls_multiplicative(A, B, tol=1e-10, max_iter=2000, return_history=False):
    """Minimize ``0.5 * ||B - A @ X||_F^2`` over X >= 0, A fixed.

    Multiplicative updates from an all-ones start; columns of B are handled
    jointly but are independent in the objective.
    """
    A = check_non_negative(A, "A")
    B = check_non_negative(B, "B")
    if A.shape[0] != B.shape[0]:
        raise ValueError(f"row mismatch: A has {A.shape[0]}, B has {B.shape[0]}")
    AtB = A.T @ B
    AtA = A.T @ A
    X = np.ones((A.shape[1], B.shape[1]))
    history = [0.5 * np.linalg.norm(B - A @ X) ** 2]
    for _ in range(max_iter):
        X *= AtB / (AtA @ X + _EPS)
        obj = 0.5 * np.linalg.norm(B - A @ X) ** 2
        history.append(obj)
        prev = history[-2]
        if prev - obj < tol * max(prev, _EPS):
            break
    if return_history:
        return X, history
    return X


def nnls_fit(V, F, tol=1e-10, max_iter=2000):
    """Minimize ``0.5 * ||V - G @ F||_F^2`` over G >= 0 with the basis fixed."""
    V = check_non_negative(V, "V")
    F = check_non_negative(F, "F")
    if np.any(F.sum(axis=1) == 0):
        raise ValueError("F has an all-zero row")
    if V.shape[0] == 0:
        return np.zeros((0, F.shape[0]))
    return nnls_multiplicative(F.T, V.T, tol=tol, max_iter=max_iter).T


def model_bits(n, f, r, bits):
    return bits * (n * r + r * f)


def select_rank(V, r_range, bits=0.25, tol=1e-6, max_iter=500, seed=0, restarts=3,
                return_curve=False):
    """MDL choice of the factorization rank.

    Description length per candidate rank is model bits, ``bits`` per stored
    factor entry, plus a Gaussian code length for the residuals with the
    empirical entry variance of ``V`` as the noise scale.  Ties break toward
    the smaller rank.
    """
    V = check_non_negative(V, "V")
    r_range = sorted(set(int(r) for r in r_range))
    if not r_range:
        raise ValueError("r_range is empty")
    n, f = V.shape
    sigma2 = max(float(V.var()), _EPS)
    curve = []
    best_r, best_L = None, np.inf
    for r in r_range:
        G, F = nmf_factorize(V, r, tol=tol, max_iter=max_iter, seed=seed,
                             restarts=restarts)
        error_bits = float(((V - G @ F) ** 2).sum()) / (2.0 * np.log(2.0) * sigma2)
        L = model_bits(n, f, r, bits) + error_bits
        curve.append({"r": r, "model_bits": model_bits(n, f, r, bits),
                      "error_bits": error_bits, "total_bits": L})
        if L < best_L:
            best_r, best_L = r, L
    if return_curve:
        return best_r, curve
    return best_r
