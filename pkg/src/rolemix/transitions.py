"""Role-transition operators: single-step, stacked-window and kernel-weighted
summary models.

A transition matrix T maps memberships at one step to the next,
``G_prev @ T ~ G_next``, and is fit by nonnegative least squares with the
previous memberships held fixed.  Rows include the inactive state, so nodes
appearing or disappearing contribute active<->inactive evidence.
"""

from dataclasses import dataclass

import numpy as np

from .nmf import nnls_multiplicative
from .validation import check_non_negative, check_same_shape


@dataclass
class TransitionMatrix:
    values: np.ndarray  # (r+1) x (r+1), nonnegative
    scope: str = "global"  # "global" or "node:<id>"
    window: tuple = None  # (from_t, to_t)

    def row_normalized(self):
        sums = self.values.sum(axis=1, keepdims=True)
        out = np.divide(self.values, sums, out=np.zeros_like(self.values),
                        where=sums > 0)
        return TransitionMatrix(out, self.scope, self.window)


@dataclass
class KernelSpec:
    """Decay kernel for the summary model.

    ``exponential``: raw weight (1-theta)^(t-i); ``linear``:
    max(0, 1 - theta*(t-i)/w); ``uniform``: 1.  Raw weights over the window
    are normalized to sum to 1.
    """

    kind: str = "exponential"
    theta: float = 0.7
    window: int = 10

    def __post_init__(self):
        if self.kind not in ("exponential", "linear", "uniform"):
            raise ValueError(f"unknown kernel kind {self.kind!r}")
        if not (0 < self.theta <= 1):
            raise ValueError(f"theta must be in (0, 1], got {self.theta}")
        if self.window < 1:
            raise ValueError(f"window must be >= 1, got {self.window}")

    def weights(self, lags):
        """Normalized weights for an array of lags (t - i), newest lag 0."""
        lags = np.asarray(lags, dtype=float)
        if self.kind == "exponential":
            raw = (1.0 - self.theta) ** lags
        elif self.kind == "linear":
            raw = np.maximum(0.0, 1.0 - self.theta * lags / self.window)
        else:
            raw = np.ones_like(lags)
        total = raw.sum()
        if total == 0:
            raw = np.where(lags == lags.min(), 1.0, 0.0)
            total = raw.sum()
        return raw / total


def estimate_transition(G_prev, G_next, normalize_rows=False, scope="global",
                        window=None, tol=1e-10, max_iter=2000):
    """Fit T >= 0 minimizing ``0.5 * ||G_next - G_prev @ T||_F^2``."""
    G_prev = check_non_negative(G_prev, "G_prev")
    G_next = check_non_negative(G_next, "G_next")
    check_same_shape(G_prev, G_next, ("G_prev", "G_next"))
    if G_prev.shape[0] == 0:
        raise ValueError("empty membership matrices")
    T = nnls_multiplicative(G_prev, G_next, tol=tol, max_iter=max_iter)
    tm = TransitionMatrix(T, scope=scope, window=window)
    if normalize_rows:
        tm = tm.row_normalized()
    return tm


def stacked_transition(series, t, w=10, normalize_rows=False, **kw):
    """Transition model fit on the stacked pairs of the w previous steps."""
    if t < 1:
        raise ValueError("t must be >= 1")
    k = max(0, t - w)
    G = series.stacked()
    prev = np.vstack([G[tau] for tau in range(k, t)])
    nxt = np.vstack([G[tau + 1] for tau in range(k, t)])
    return estimate_transition(prev, nxt, normalize_rows=normalize_rows,
                               window=(k, t), **kw)


def summary_snapshot(series, t, kernel):
    """Kernel-weighted sum of the memberships in the window ending at t."""
    if t < 0 or t >= len(series):
        raise ValueError(f"t={t} outside series of length {len(series)}")
    k = max(0, t - kernel.window + 1)
    idx = np.arange(k, t + 1)
    alpha = kernel.weights(t - idx)
    G = series.stacked()
    out = np.zeros_like(G[t])
    for a, i in zip(alpha, idx):
        out += a * G[i]
    return out


def summary_transition(series, t, kernel, normalize_rows=False, **kw):
    """Transition model fit from the summary snapshot at t-1 onto G_t."""
    if t < 1:
        raise ValueError("t must be >= 1")
    G_s = summary_snapshot(series, t - 1, kernel)
    return estimate_transition(G_s, series.matrices[t].values,
                               normalize_rows=normalize_rows,
                               window=(max(0, t - kernel.window), t), **kw)
