"""Recursive structural node features per snapshot.

Base measures are degree and egonet counts; sum/mean neighbor aggregates are
added recursively and near-duplicate columns are pruned by vertical log
binning, until an iteration contributes no new surviving feature.  The
surviving definition list is frozen and evaluated on every snapshot so all
feature matrices share one column space.
"""

import warnings
from dataclasses import dataclass

import numpy as np
import scipy.sparse as sp
from joblib import Parallel, delayed
from numba import njit

BASE_MEASURES = (
    "in_degree",
    "out_degree",
    "total_degree",
    "weighted_in_degree",
    "weighted_out_degree",
    "weighted_total_degree",
    "egonet_edges",
    "egonet_weight",
    "egonet_boundary_edges",
    "egonet_boundary_weight",
)


@dataclass(frozen=True)
class FeatureDefinition:
    id: int
    kind: str  # "base" or "aggregate"
    base_measure: str = None
    parent: int = None
    aggregator: str = None  # "sum" or "mean"
    generation: int = 0

    def name(self, defs_by_id=None):
        if self.kind == "base":
            return self.base_measure
        parent_name = (
            defs_by_id[self.parent].name(defs_by_id) if defs_by_id else str(self.parent)
        )
        return f"{self.aggregator}({parent_name})"


@dataclass
class FeatureMatrix:
    snapshot_index: int
    nodes: np.ndarray  # global ids of the rows, universe order
    values: np.ndarray  # n_t x f, non-negative


@dataclass
class FeatureMatrixSeries:
    definitions: list
    matrices: list
    n_nodes: int  # size of the global universe

    @property
    def n_features(self):
        return len(self.definitions)

    def names(self):
        by_id = {d.id: d for d in self.definitions}
        return [d.name(by_id) for d in self.definitions]


@njit(cache=True)
def _egonet_counts(n, u_indptr, u_indices, out_indptr, out_indices, out_data,
                   in_indptr, in_indices, in_data):
    internal = np.zeros(n)
    internal_w = np.zeros(n)
    boundary = np.zeros(n)
    boundary_w = np.zeros(n)
    mark = np.zeros(n, dtype=np.bool_)
    for x in range(n):
        mark[x] = True
        for j in range(u_indptr[x], u_indptr[x + 1]):
            mark[u_indices[j]] = True
        # every directed edge with >=1 endpoint in the egonet, counted once
        members = u_indices[u_indptr[x]:u_indptr[x + 1]]
        for mi in range(len(members) + 1):
            v = x if mi == len(members) else members[mi]
            for j in range(out_indptr[v], out_indptr[v + 1]):
                w = out_indices[j]
                if mark[w]:
                    internal[x] += 1.0
                    internal_w[x] += out_data[j]
                else:
                    boundary[x] += 1.0
                    boundary_w[x] += out_data[j]
            for j in range(in_indptr[v], in_indptr[v + 1]):
                w = in_indices[j]
                if not mark[w]:
                    boundary[x] += 1.0
                    boundary_w[x] += in_data[j]
        mark[x] = False
        for j in range(u_indptr[x], u_indptr[x + 1]):
            mark[u_indices[j]] = False
    return internal, internal_w, boundary, boundary_w


def _union_graph(adj):
    """0/1 CSR of the in/out neighbor union, no self entries."""
    u = (adj + adj.T).tocsr()
    u.setdiag(0)
    u.eliminate_zeros()
    u.data = np.ones_like(u.data)
    return u


def base_features(snapshot):
    """The 10 base degree/egonet measures for one snapshot."""
    adj = snapshot.adjacency
    n = adj.shape[0]
    if n == 0:
        return FeatureMatrix(snapshot.index, snapshot.active_nodes,
                             np.zeros((0, len(BASE_MEASURES))))
    adj_t = adj.T.tocsr()
    out_deg = np.diff(adj.indptr).astype(float)
    in_deg = np.diff(adj_t.indptr).astype(float)
    w_out = np.asarray(adj.sum(axis=1)).ravel()
    w_in = np.asarray(adj.sum(axis=0)).ravel()
    union = _union_graph(adj)
    internal, internal_w, boundary, boundary_w = _egonet_counts(
        n, union.indptr, union.indices,
        adj.indptr, adj.indices, adj.data,
        adj_t.indptr, adj_t.indices, adj_t.data,
    )
    values = np.column_stack([
        in_deg, out_deg, in_deg + out_deg,
        w_in, w_out, w_in + w_out,
        internal, internal_w, boundary, boundary_w,
    ])
    return FeatureMatrix(snapshot.index, snapshot.active_nodes, values)


def neighbor_aggregates(values, snapshot):
    """Neighbor-sum and neighbor-mean of each column (union neighborhoods).

    Returns ``(sums, means)`` with the same shape as ``values``; nodes with no
    neighbors get zeros.
    """
    union = _union_graph(snapshot.adjacency)
    sums = union @ values
    deg = np.asarray(union.sum(axis=1)).ravel()
    means = np.divide(sums, deg[:, None], out=np.zeros_like(sums),
                      where=deg[:, None] > 0)
    return sums, means


def recursive_aggregate(fm, snapshot):
    """Append sum/mean neighbor aggregates for every existing column."""
    sums, means = neighbor_aggregates(fm.values, snapshot)
    cols = [fm.values]
    for j in range(fm.values.shape[1]):
        cols.append(sums[:, j:j + 1])
        cols.append(means[:, j:j + 1])
    return FeatureMatrix(fm.snapshot_index, fm.nodes, np.hstack(cols))


def vertical_log_bin(column, p=0.5):
    """Rank-based logarithmic binning of one column.

    The fraction ``p`` of nodes with smallest values goes to bin 0, then the
    remainder is binned recursively.  Purely order-based, so any monotone
    rescaling of the column yields the same bins.
    """
    m = len(column)
    order = np.argsort(column, kind="stable")
    bins = np.zeros(m, dtype=np.int64)
    start, b = 0, 0
    while start < m:
        k = max(1, int(np.ceil(p * (m - start))))
        bins[order[start:start + k]] = b
        start += k
        b += 1
    return bins


def _duplicate_components(binned, s):
    """Connected components of the 'disagree on <= s rows' relation."""
    f = binned.shape[1]
    parent = list(range(f))

    def find(a):
        while parent[a] != a:
            parent[a] = parent[parent[a]]
            a = parent[a]
        return a

    def union(a, b):
        ra, rb = find(a), find(b)
        if ra != rb:
            parent[rb] = ra

    if s == 0:
        groups = {}
        for j in range(f):
            groups.setdefault(binned[:, j].tobytes(), []).append(j)
        for members in groups.values():
            for j in members[1:]:
                union(members[0], j)
    else:
        for i in range(f):
            for j in range(i + 1, f):
                if np.count_nonzero(binned[:, i] != binned[:, j]) <= s:
                    union(i, j)
    comps = {}
    for j in range(f):
        comps.setdefault(find(j), []).append(j)
    return list(comps.values())


def prune_correlated(values, defs, p=0.5, s=0, protected=frozenset()):
    """Drop near-duplicate feature columns.

    Two features are duplicates when their log-binned vectors disagree on at
    most ``s`` rows.  Within each duplicate component the protected members
    survive; if none is protected, the feature with smallest generation
    (ties: smallest id) survives.  Returns ``(values, defs)`` restricted to
    the survivors, preserving column order.
    """
    if values.shape[1] == 0:
        return values, list(defs)
    binned = np.column_stack([vertical_log_bin(values[:, j], p)
                              for j in range(values.shape[1])])
    keep = []
    for comp in _duplicate_components(binned, s):
        prot = [j for j in comp if defs[j].id in protected]
        if prot:
            keep.extend(prot)
        else:
            keep.append(min(comp, key=lambda j: (defs[j].generation, defs[j].id)))
    keep.sort()
    return values[:, keep], [defs[j] for j in keep]


def evaluate_definitions(snapshot, definitions, log_transform=False):
    """Evaluate a frozen definition list on one snapshot."""
    base = base_features(snapshot)
    by_id = {}
    for m, name in enumerate(BASE_MEASURES):
        by_id[name] = base.values[:, m]
    columns = {}
    by_gen = sorted(definitions, key=lambda d: d.generation)
    # aggregates reference parents within the list (discovery only aggregates
    # retained features), so a generation-ordered pass suffices
    agg_cache = {}
    for d in by_gen:
        if d.kind == "base":
            columns[d.id] = by_id[d.base_measure]
        else:
            parent_col = columns[d.parent]
            key = d.parent
            if key not in agg_cache:
                s, m = neighbor_aggregates(parent_col[:, None], snapshot)
                agg_cache[key] = (s[:, 0], m[:, 0])
            columns[d.id] = agg_cache[key][0 if d.aggregator == "sum" else 1]
    values = np.column_stack([columns[d.id] for d in definitions]) \
        if definitions else np.zeros((base.values.shape[0], 0))
    if log_transform:
        values = np.log1p(values)
    return FeatureMatrix(snapshot.index, snapshot.active_nodes, values)


def discover_definitions(series, p=0.5, s=0, max_generation=4, reference="concat"):
    """Discover and freeze the feature definition list on reference data.

    ``reference`` selects the data the pruning sees: ``"concat"`` stacks the
    candidate columns of every snapshot vertically, ``"first"`` uses only the
    first nonempty snapshot.  Base measures are always retained; candidate
    aggregates must survive pruning against everything already retained.
    """
    snaps = [sn for sn in series.snapshots if sn.n_active > 0]
    if not snaps:
        raise ValueError("series has no nonempty snapshot")
    if reference == "first":
        snaps = snaps[:1]

    defs = [FeatureDefinition(i, "base", base_measure=m)
            for i, m in enumerate(BASE_MEASURES)]
    next_id = len(defs)
    base_vals = [base_features(sn).values for sn in snaps]
    retained_defs = list(defs)
    retained_vals = list(base_vals)  # per-snapshot n_t x f_retained

    for gen in range(1, max_generation + 1):
        parents = [(j, d) for j, d in enumerate(retained_defs)
                   if d.generation == gen - 1]
        if not parents:
            break
        new_defs = []
        new_vals = [[] for _ in snaps]
        for j, d in parents:
            for agg in ("sum", "mean"):
                new_defs.append(FeatureDefinition(
                    next_id, "aggregate", parent=d.id, aggregator=agg,
                    generation=gen))
                next_id += 1
        for si, sn in enumerate(snaps):
            parent_block = retained_vals[si][:, [j for j, _ in parents]]
            sums, means = neighbor_aggregates(parent_block, sn)
            cols = []
            for k in range(len(parents)):
                cols.append(sums[:, k])
                cols.append(means[:, k])
            new_vals[si] = np.column_stack(cols)
        cand_defs = retained_defs + new_defs
        cand_stack = np.vstack([
            np.hstack([retained_vals[si], new_vals[si]]) for si in range(len(snaps))
        ])
        protected = {d.id for d in retained_defs}
        _, surviving = prune_correlated(cand_stack, cand_defs, p=p, s=s,
                                        protected=protected)
        surviving_new = [d for d in surviving if d.id not in protected]
        if not surviving_new:
            break
        new_ids = {d.id for d in surviving_new}
        keep_cols = [k for k, d in enumerate(new_defs) if d.id in new_ids]
        retained_defs = retained_defs + [new_defs[k] for k in keep_cols]
        retained_vals = [np.hstack([retained_vals[si], new_vals[si][:, keep_cols]])
                         for si in range(len(snaps))]
    else:
        warnings.warn(
            f"feature recursion stopped at the generation cap ({max_generation})",
            stacklevel=2,
        )
    return retained_defs


def discover_features(series, p=0.5, s=0, max_generation=4, reference="concat",
                      log_transform=False, workers=1):
    """Discover definitions and evaluate them on every snapshot."""
    definitions = discover_definitions(series, p=p, s=s,
                                       max_generation=max_generation,
                                       reference=reference)
    return evaluate_features(series, definitions, log_transform=log_transform,
                             workers=workers)


def evaluate_features(series, definitions, log_transform=False, workers=1):
    """Evaluate a frozen definition list on every snapshot of a series."""
    if workers != 1:
        matrices = Parallel(n_jobs=workers)(
            delayed(evaluate_definitions)(sn, definitions, log_transform)
            for sn in series.snapshots)
    else:
        matrices = [evaluate_definitions(sn, definitions, log_transform)
                    for sn in series.snapshots]
    return FeatureMatrixSeries(definitions=list(definitions), matrices=matrices,
                               n_nodes=series.n_nodes)
