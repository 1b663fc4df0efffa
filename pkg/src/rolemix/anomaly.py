"""Per-node transition models and divergence-from-network anomaly scores.

Each node gets its own transition model fit on its membership row pairs; the
score applies that model to the whole network's memberships and measures how
badly it predicts the next step.  Nodes whose behavior diverges from the
network therefore rank highest.  Scores with insufficient history are
reported as undefined (NaN plus a mask), never silently zero.
"""

from dataclasses import dataclass

import numpy as np

from .nmf import _EPS
from .transitions import KernelSpec, estimate_transition, summary_snapshot


class InsufficientHistoryError(ValueError):
    pass


@dataclass
class AnomalyScores:
    scores: np.ndarray  # NaN where undefined
    defined: np.ndarray  # bool mask
    t_evaluated: int

    def ranked(self):
        """Defined node ids, highest score first."""
        ids = np.flatnonzero(self.defined)
        return ids[np.argsort(-self.scores[ids], kind="stable")]


@dataclass
class AnomalyTimeSeries:
    scores: np.ndarray  # t_max x n, NaN outside the evaluable range
    defined: np.ndarray

    def network_mean(self):
        counts = self.defined.sum(axis=1)
        sums = np.where(self.defined, self.scores, 0.0).sum(axis=1)
        return np.divide(sums, counts, out=np.full(len(counts), np.nan),
                         where=counts > 0)


def node_transition_model(series, i, window=None, **kw):
    """Transition model from node i's own consecutive membership rows.

    ``window=(start, stop)`` selects pair indices tau in [start, stop); the
    default uses every available pair.  Raises
    :class:`InsufficientHistoryError` when no pair exists.
    """
    if window is None:
        window = (0, len(series) - 1)
    start, stop = max(0, window[0]), min(len(series) - 1, window[1])
    if stop - start < 1:
        raise InsufficientHistoryError(
            f"node {i}: no membership pair in window {window}")
    G = series.stacked()
    prev = np.vstack([G[tau][i] for tau in range(start, stop)])
    nxt = np.vstack([G[tau + 1][i] for tau in range(start, stop)])
    return estimate_transition(prev, nxt, scope=f"node:{i}",
                               window=(start, stop), **kw)


def batch_node_models(series, window, tol=1e-10, max_iter=2000):
    """Per-node transition models for every node at once.

    Solves node i's nonnegative least squares over a stacked 3-D problem with
    the same multiplicative updates as the scalar solver, stopping once every
    node's relative objective decrease falls below ``tol``.  Returns the
    ``n x (r+1) x (r+1)`` model stack.
    """
    start, stop = max(0, window[0]), min(len(series) - 1, window[1])
    if stop - start < 1:
        raise InsufficientHistoryError(f"no membership pair in window {window}")
    G = series.stacked()
    # A[i] = node i's rows at start..stop-1, B[i] = the successor rows
    A = np.transpose(np.stack([G[tau] for tau in range(start, stop)]), (1, 0, 2))
    B = np.transpose(np.stack([G[tau + 1] for tau in range(start, stop)]), (1, 0, 2))
    AtB = np.matmul(np.transpose(A, (0, 2, 1)), B)
    AtA = np.matmul(np.transpose(A, (0, 2, 1)), A)
    n, c = A.shape[0], A.shape[2]
    X = np.ones((n, c, c))
    prev = 0.5 * np.einsum("nij,nij->n", B - np.matmul(A, X),
                           B - np.matmul(A, X))
    for _ in range(max_iter):
        X *= AtB / (np.matmul(AtA, X) + _EPS)
        resid = B - np.matmul(A, X)
        obj = 0.5 * np.einsum("nij,nij->n", resid, resid)
        if np.all(prev - obj < tol * np.maximum(prev, _EPS)):
            break
        prev = obj
    return X


def anomaly_scores(series, t, window=None, per_row=False, **kw):
    """Divergence scores at step t (predicting step t+1).

    Node models are fit on pairs in ``window`` (default: all history up to
    t-1, the pairs 0..t-1).  The prediction ``G_t @ T_i`` covers the whole
    network unless ``per_row`` restricts the comparison to node i's own row.
    """
    if t + 1 >= len(series):
        raise ValueError(f"t={t} has no successor snapshot")
    if window is None:
        window = (0, t)
    n = series.n_nodes
    G_t = series.matrices[t].values
    G_next = series.matrices[t + 1].values
    scores = np.full(n, np.nan)
    defined = np.zeros(n, dtype=bool)
    try:
        models = batch_node_models(series, window, **kw)
    except InsufficientHistoryError:
        return AnomalyScores(scores=scores, defined=defined, t_evaluated=t)
    if per_row:
        pred = np.einsum("ij,ijk->ik", G_t, models)
        scores[:] = np.linalg.norm(G_next - pred, axis=1)
    else:
        for i in range(n):
            pred = G_t @ models[i]
            scores[i] = np.linalg.norm(G_next - pred)
    defined[:] = True
    return AnomalyScores(scores=scores, defined=defined, t_evaluated=t)


def anomaly_timeseries(series, window_a=5, per_row=True, kernel=None, **kw):
    """Sliding-window score curves, one per node (time-varying anomalies).

    The score at step s measures how surprising the *arrival* of step s was:
    node models are refit on the pairs in ``[s - 1 - window_a, s - 2]`` and
    predict step s from the kernel-weighted summary of the history through
    s-1.  Predicting from the smoothed history rather than the raw previous
    snapshot keeps a one-step event from echoing into the following step: the
    anomalous state enters the next prediction only at its kernel weight, so
    the curve peaks when the event arrives, not when the network recovers.
    """
    if window_a < 2:
        raise ValueError("window_a must be >= 2")
    if kernel is None:
        kernel = KernelSpec()
    t_max = len(series)
    n = series.n_nodes
    scores = np.full((t_max, n), np.nan)
    defined = np.zeros((t_max, n), dtype=bool)
    for s in range(2, t_max):
        try:
            models = batch_node_models(series,
                                       (max(0, s - 1 - window_a), s - 1), **kw)
        except InsufficientHistoryError:
            continue
        G_in = summary_snapshot(series, s - 1, kernel)
        G_s = series.matrices[s].values
        if per_row:
            pred = np.einsum("ij,ijk->ik", G_in, models)
            scores[s] = np.linalg.norm(G_s - pred, axis=1)
        else:
            for i in range(n):
                scores[s, i] = np.linalg.norm(G_s - G_in @ models[i])
        defined[s] = True
    return AnomalyTimeSeries(scores=scores, defined=defined)


def sustained_departure_scores(series, t_split):
    """Permanent-change scores across a split point.

    Each node's score is its *smallest* distance, over the steps at or after
    ``t_split``, from its own average membership row before the split.  A node
    that permanently changes behavior stays far from its old average at every
    later step, while a transient fluctuation returns to baseline, so the
    minimum over post-split steps separates lasting switches from one-off
    noise.  Comparing per-node transition matrices across the split does not
    work here: a node with near-constant membership rows admits many equally
    good transition models, so the model entries (unlike their predictions)
    carry no signal.
    """
    if not (1 <= t_split <= len(series) - 1):
        raise ValueError(
            f"t_split={t_split} outside series of length {len(series)}")
    G = np.stack(series.stacked())
    base = G[:t_split].mean(axis=0)
    dist = np.linalg.norm(G[t_split:] - base[None], axis=2)
    return AnomalyScores(scores=dist.min(axis=0),
                         defined=np.ones(series.n_nodes, dtype=bool),
                         t_evaluated=t_split)


def detection_hit(scores, injected, factor=2):
    """True when every injected node ranks inside the top ``factor * a`` scores."""
    injected = set(int(i) for i in injected)
    top = set(int(i) for i in scores.ranked()[: factor * len(injected)])
    return injected <= top
