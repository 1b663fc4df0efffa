"""Role interpretation against classical node measures, and clustering of
per-node transition models."""

from dataclasses import dataclass

import networkx as nx
import numpy as np
from sklearn.cluster import KMeans

from .nmf import nnls_multiplicative
from .validation import check_non_negative

MEASURES = ("total_degree", "weighted_degree", "pagerank",
            "clustering_coefficient", "betweenness")


@dataclass
class MeasureMatrix:
    snapshot_index: int
    nodes: np.ndarray
    values: np.ndarray  # n_t x m
    columns: tuple
    normalized: bool = False


@dataclass
class RoleExplanation:
    values: np.ndarray  # r x m, averaged over time
    columns: tuple
    dominant: list  # per-role largest-contribution measure name
    unexplained: list  # role indices with a degenerate (all-zero) column


@dataclass
class TransitionClustering:
    labels: np.ndarray
    centroids: np.ndarray
    embedding: np.ndarray  # n x d low-rank coordinates
    inertia: float
    node_ids: np.ndarray
    cluster_profiles: np.ndarray = None  # k x t_max x (r+1)


def pagerank(adj, damping=0.85, tol=1e-8, max_iter=1000):
    """Power iteration with uniform teleport; converges to L1 residual < tol."""
    n = adj.shape[0]
    if n == 0:
        return np.zeros(0)
    out = np.asarray(adj.sum(axis=1)).ravel()
    P = adj.multiply(np.divide(1.0, out, out=np.zeros_like(out),
                               where=out > 0)[:, None]).tocsr()
    dangling = out == 0
    x = np.full(n, 1.0 / n)
    for _ in range(max_iter):
        new = damping * (P.T @ x) + (damping * x[dangling].sum() + 1 - damping) / n
        if np.abs(new - x).sum() < tol:
            return new
        x = new
    return x


def node_measures(snapshot, which=MEASURES, betweenness_cap=20000):
    """Classical measures per active node of one snapshot.

    Clustering coefficient and betweenness use the undirected simple
    projection (betweenness exact and pair-normalized, refused above
    ``betweenness_cap`` nodes).
    """
    adj = snapshot.adjacency
    n = adj.shape[0]
    und = ((adj + adj.T) > 0).tocoo()
    graph = nx.Graph()
    graph.add_nodes_from(range(n))
    graph.add_edges_from((int(i), int(j)) for i, j in zip(und.row, und.col)
                         if i < j)
    cols = []
    for name in which:
        if name == "total_degree":
            col = np.diff(adj.indptr) + np.diff(adj.T.tocsr().indptr)
        elif name == "weighted_degree":
            col = (np.asarray(adj.sum(axis=1)).ravel()
                   + np.asarray(adj.sum(axis=0)).ravel())
        elif name == "pagerank":
            col = pagerank(adj)
        elif name == "clustering_coefficient":
            col = np.array([nx.clustering(graph, v) for v in range(n)])
        elif name == "betweenness":
            if n > betweenness_cap:
                raise ValueError(
                    f"betweenness refused on {n} nodes (cap {betweenness_cap})")
            bc = nx.betweenness_centrality(graph, normalized=True)
            col = np.array([bc[v] for v in range(n)])
        else:
            raise ValueError(f"unknown measure {name!r}")
        cols.append(np.asarray(col, dtype=float))
    return MeasureMatrix(snapshot.index, snapshot.active_nodes,
                         np.column_stack(cols) if cols else np.zeros((n, 0)),
                         tuple(which))


def max_normalize(mm):
    """Per-column max normalization to [0, 1]."""
    vals = mm.values.copy()
    maxima = vals.max(axis=0, initial=0.0)
    nz = maxima > 0
    vals[:, nz] /= maxima[nz]
    return MeasureMatrix(mm.snapshot_index, mm.nodes, vals, mm.columns,
                         normalized=True)


def explain_roles(memberships, measure_series):
    """Average contribution of each node measure to each role.

    Per snapshot, fits E >= 0 minimizing ``0.5 * ||M - G @ E||_F^2`` over the
    active rows (inactive column excluded, measures max-normalized), then
    averages across snapshots.  Roles with an all-zero membership column
    everywhere are flagged unexplained.
    """
    r = memberships.r
    per_t = []
    used = np.zeros(r, dtype=bool)
    for mm in measure_series:
        norm = max_normalize(mm) if not mm.normalized else mm
        G = memberships.matrices[mm.snapshot_index].values[mm.nodes, :r]
        col_used = G.sum(axis=0) > 0
        used |= col_used
        if not col_used.any() or norm.values.shape[0] == 0:
            continue
        E = np.zeros((r, norm.values.shape[1]))
        E[col_used] = nnls_multiplicative(G[:, col_used],
                                          check_non_negative(norm.values, "M"))
        per_t.append((E, col_used))
    if not per_t:
        raise ValueError("no snapshot with active roles to explain")
    m = per_t[0][0].shape[1]
    total = np.zeros((r, m))
    counts = np.zeros(r)
    for E, col_used in per_t:
        total[col_used] += E[col_used]
        counts[col_used] += 1
    values = np.divide(total, counts[:, None], out=np.full_like(total, np.nan),
                       where=counts[:, None] > 0)
    columns = measure_series[0].columns
    dominant = [columns[int(np.argmax(values[k]))] if counts[k] else None
                for k in range(r)]
    unexplained = [k for k in range(r) if not used[k]]
    return RoleExplanation(values=values, columns=columns, dominant=dominant,
                           unexplained=unexplained)


def cluster_transitions(node_models, k, d=2, seed=0, restarts=50,
                        membership_series=None):
    """k-means over vectorized per-node transition models.

    Models are flattened row-major; clustering uses seeded k-means++ with
    ``restarts`` initializations, and the 2-D/3-D embedding is the best
    rank-``d`` least-squares approximation of the model matrix (nodes plotted
    via the left singular factors).  ``node_models`` entries may be None for
    nodes without a defined model; those are excluded.
    """
    ids = np.array([i for i, T in enumerate(node_models) if T is not None])
    if k < 2:
        raise ValueError("k must be >= 2")
    if k > len(ids):
        raise ValueError(f"k={k} exceeds the {len(ids)} defined node models")
    X = np.vstack([node_models[i].values.ravel() for i in ids])
    km = KMeans(n_clusters=k, n_init=restarts, random_state=seed).fit(X)
    U, S, _ = np.linalg.svd(X, full_matrices=False)
    d_eff = min(d, len(S))
    embedding = U[:, :d_eff] * S[:d_eff]
    profiles = None
    if membership_series is not None:
        t_max = len(membership_series)
        rp1 = membership_series.matrices[0].values.shape[1]
        profiles = np.zeros((k, t_max, rp1))
        for c in range(k):
            members = ids[km.labels_ == c]
            for t in range(t_max):
                profiles[c, t] = membership_series.matrices[t].values[members].mean(axis=0)
    return TransitionClustering(labels=km.labels_, centroids=km.cluster_centers_,
                                embedding=embedding, inertia=float(km.inertia_),
                                node_ids=ids, cluster_profiles=profiles)
