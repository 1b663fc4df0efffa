"""Shared helpers for the test suite."""

import re

import numpy as np
import pytest

from rolemix.roles import MembershipMatrix, MembershipSeries
from rolemix.temporal import TemporalEdge, build_snapshots


def make_series(edge_tuples, labels=None, interval=1.0, symmetrize=False):
    """Snapshot series from (src, dst, weight, timestamp) tuples."""
    edges = [TemporalEdge(*e) for e in edge_tuples]
    return build_snapshots(edges, interval, labels=labels, symmetrize=symmetrize)


def star_edges(n_leaves, ts=0.0):
    """Directed star: center 0 -> leaves 1..n_leaves at one timestamp."""
    return [(0, i, 1.0, ts) for i in range(1, n_leaves + 1)]


def simplex_rows(rng, n, c):
    return rng.dirichlet(np.ones(c), size=n)


def planted_membership_series(n=300, c=5, steps=32, noise=0.02, seed=1,
                              alpha=0.95, return_transition=False):
    """Membership series driven by a planted row-stochastic transition.

    The transition is a single-step cyclic rotation blended with the uniform
    matrix at mixing weight ``1 - alpha``; small-``1 - alpha`` values keep the
    rows heterogeneous over the whole series instead of collapsing onto the
    stationary distribution.
    """
    rng = np.random.default_rng(seed)
    T = alpha * np.roll(np.eye(c), 1, axis=1) + (1 - alpha) / c
    G = simplex_rows(rng, n, c)
    mats = []
    for t in range(steps):
        mats.append(MembershipMatrix(t, G))
        G = G @ T + noise * rng.standard_normal((n, c))
        G = np.clip(G, 0.0, None)
        G /= G.sum(axis=1, keepdims=True)
    series = MembershipSeries(mats, r=c - 1)
    if return_transition:
        return series, T
    return series


def shuffle_series(series, seed=7):
    rng = np.random.default_rng(seed)
    perm = rng.permutation(len(series))
    mats = [MembershipMatrix(t, series.matrices[p].values)
            for t, p in enumerate(perm)]
    return MembershipSeries(mats, r=series.r)


@pytest.fixture
def rng():
    return np.random.default_rng(0)


_CRITERION = re.compile(r"test_acceptance\.py::test_criterion_(\d+)_(\w+)")


def pytest_terminal_summary(terminalreporter, exitstatus, config):
    """One PASS/FAIL line per acceptance criterion at the end of the run."""
    results = {}
    for key in ("passed", "failed", "error"):
        for rep in terminalreporter.stats.get(key, []):
            match = _CRITERION.search(rep.nodeid)
            if match and getattr(rep, "when", "call") == "call" or (
                    match and key == "error"):
                results[int(match.group(1))] = (match.group(2),
                                                key == "passed")
    if not results:
        return
    terminalreporter.section("acceptance criteria")
    for k in sorted(results):
        name, ok = results[k]
        status = "PASS" if ok else "FAIL"
        terminalreporter.write_line(f"criterion {k:2d} ({name}): {status}")
