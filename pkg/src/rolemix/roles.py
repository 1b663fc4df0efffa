"""Role discovery: a global role basis plus per-snapshot mixed memberships.

The basis is learned once from the vertical concatenation of all feature
matrices; per-snapshot memberships come from nonnegative least squares
against the frozen basis.  Membership matrices live over the full node
universe with an explicit inactive state in the last column: a node absent
from a snapshot has the row (0, ..., 0, 1), an active node has inactive
entry 0 and its role entries normalized to sum to 1.
"""

import warnings
from dataclasses import dataclass, field

import numpy as np

from .nmf import nmf_factorize, nnls_fit, select_rank


@dataclass
class RoleBasis:
    values: np.ndarray  # r x f

    @property
    def n_roles(self):
        return self.values.shape[0]


@dataclass
class MembershipMatrix:
    snapshot_index: int
    values: np.ndarray  # n_universe x (r+1); last column is the inactive state
    activity: np.ndarray = None  # pre-normalization row sums of active rows

    @property
    def inactive(self):
        return self.values[:, -1]


@dataclass
class MembershipSeries:
    matrices: list
    r: int
    uniform_fallback_rows: int = 0  # all-zero NNLS rows replaced by uniform
    mdl_curve: list = field(default_factory=list)

    def __len__(self):
        return len(self.matrices)

    @property
    def n_nodes(self):
        return self.matrices[0].values.shape[0]

    def stacked(self):
        return [m.values for m in self.matrices]


def embed_membership(G_active, nodes, n_universe, snapshot_index,
                     normalize=True):
    """Lift active-node role loadings into a universe x (r+1) membership matrix."""
    r = G_active.shape[1]
    values = np.zeros((n_universe, r + 1))
    values[:, -1] = 1.0
    activity = G_active.sum(axis=1)
    fallback = 0
    if len(nodes):
        rows = G_active.copy()
        zero = activity == 0
        fallback = int(zero.sum())
        if fallback:
            rows[zero] = 1.0 / r
        sums = rows.sum(axis=1, keepdims=True)
        if normalize:
            rows = rows / sums
        values[nodes, :r] = rows
        values[nodes, -1] = 0.0
    return MembershipMatrix(snapshot_index, values, activity), fallback


def build_membership_series(features, r=None, r_range=None, bits=0.25, seed=0,
                            restarts=5, tol=1e-6, max_iter=500, normalize=True):
    """Learn the role basis and the per-snapshot membership series.

    ``r=None`` selects the rank by MDL over ``r_range`` (default 1..8, capped
    by the data shape).  Returns ``(MembershipSeries, RoleBasis)``.
    """
    active = [fm for fm in features.matrices if fm.values.shape[0] > 0]
    if not active:
        raise ValueError("feature series has no active nodes")
    V_stack = np.vstack([fm.values for fm in active])
    n, f = V_stack.shape
    cap = min(n, f) - 1
    if cap < 1:
        raise ValueError(f"cannot factorize a {n}x{f} feature stack")
    mdl_curve = []
    if r is None:
        if r_range is None:
            r_range = range(1, min(8, cap) + 1)
        r_range = [x for x in r_range if 1 <= x <= cap]
        r, mdl_curve = select_rank(V_stack, r_range, bits=bits, tol=tol,
                                   max_iter=max_iter, seed=seed,
                                   restarts=restarts, return_curve=True)
    _, F = nmf_factorize(V_stack, r, tol=tol, max_iter=max_iter, seed=seed,
                         restarts=restarts)
    zero_rows = np.flatnonzero(F.sum(axis=1) == 0)
    if len(zero_rows):
        warnings.warn(f"role basis has unused all-zero rows {zero_rows.tolist()}",
                      stacklevel=2)
        F = F.copy()
        F[zero_rows] = 1e-10  # keep NNLS well-posed; the roles stay unused
    basis = RoleBasis(F)

    matrices, fallbacks = [], 0
    for fm in features.matrices:
        G = nnls_fit(fm.values, F)
        mm, fb = embed_membership(G, fm.nodes, features.n_nodes,
                                  fm.snapshot_index, normalize=normalize)
        matrices.append(mm)
        fallbacks += fb
    series = MembershipSeries(matrices=matrices, r=r,
                              uniform_fallback_rows=fallbacks,
                              mdl_curve=mdl_curve)
    return series, basis


def fit_memberships(features, basis, normalize=True):
    """Membership series for a (possibly new) feature series under a frozen basis."""
    matrices = []
    for fm in features.matrices:
        G = nnls_fit(fm.values, basis.values)
        mm, _ = embed_membership(G, fm.nodes, features.n_nodes,
                                 fm.snapshot_index, normalize=normalize)
        matrices.append(mm)
    return MembershipSeries(matrices=matrices, r=basis.n_roles)
