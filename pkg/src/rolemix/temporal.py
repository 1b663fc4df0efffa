"""Edge-list ingestion and windowing into a sequence of network snapshots.

A dynamic network is represented as a list of :class:`Snapshot` objects over a
global node universe.  Node labels are interned to dense integer ids in order
of first appearance so that membership rows stay aligned across time.
"""

import math
import re
from dataclasses import dataclass, field

import numpy as np
import scipy.sparse as sp

from .validation import check_positive

_SPLIT = re.compile(r"[,\t ]+")


class ParseError(ValueError):
    """Malformed edge-list record; carries the 1-based line number."""

    def __init__(self, line_number, message):
        super().__init__(f"line {line_number}: {message}")
        self.line_number = line_number


@dataclass(frozen=True)
class TemporalEdge:
    source: int
    target: int
    weight: float = 1.0
    timestamp: float = 0.0


@dataclass
class Snapshot:
    """One time interval of the dynamic network.

    ``adjacency`` is a weighted directed CSR matrix over the *active* nodes of
    the interval (parallel edges merged by weight summation, self-loops
    removed).  ``active_nodes`` holds the corresponding global node ids in
    universe order.
    """

    index: int
    active_nodes: np.ndarray
    adjacency: sp.csr_matrix

    @property
    def n_active(self):
        return len(self.active_nodes)

    @property
    def n_edges(self):
        return self.adjacency.nnz


@dataclass
class SnapshotSeries:
    labels: list
    snapshots: list
    interval_length: float
    t_min: float = 0.0
    dropped_self_loops: int = 0
    n_input_edges: int = 0
    label_to_id: dict = field(default_factory=dict)

    def __post_init__(self):
        if not self.label_to_id:
            self.label_to_id = {lab: i for i, lab in enumerate(self.labels)}

    @property
    def n_nodes(self):
        return len(self.labels)

    def __len__(self):
        return len(self.snapshots)

    def summary(self):
        """Ingestion summary as a JSON-ready dict."""
        return {
            "nodes": self.n_nodes,
            "edges": self.n_input_edges,
            "snapshots": len(self.snapshots),
            "dropped_self_loops": self.dropped_self_loops,
            "t_min": self.t_min,
            "t_max": len(self.snapshots),
        }


def parse_edge_list(stream, static=False):
    """Parse a text edge list into edges and an interned label table.

    One record per line; fields split on comma, tab or runs of spaces.  Column
    layouts: ``src dst weight timestamp`` (4 columns), ``src dst timestamp``
    (3 columns, weight defaults to 1.0) or, when ``static`` is set,
    ``src dst [weight]`` with all timestamps forced to 0.  Blank lines and
    lines starting with ``#`` are skipped.

    Returns ``(edges, labels)`` with node labels interned to dense ids in
    first-appearance order.
    """
    if isinstance(stream, str):
        lines = stream.splitlines()
    else:
        lines = stream
    edges = []
    labels = []
    label_to_id = {}

    def intern(label):
        if label not in label_to_id:
            label_to_id[label] = len(labels)
            labels.append(label)
        return label_to_id[label]

    for lineno, raw in enumerate(lines, start=1):
        line = raw.strip()
        if not line or line.startswith("#"):
            continue
        fields = _SPLIT.split(line)
        if len(fields) < 2 or len(fields) > 4:
            raise ParseError(lineno, f"expected 2-4 fields, got {len(fields)}")
        src, dst = intern(fields[0]), intern(fields[1])
        weight, timestamp = 1.0, 0.0
        try:
            if static:
                if len(fields) >= 3:
                    weight = float(fields[2])
                if len(fields) == 4:
                    raise ParseError(
                        lineno, "static graphs take at most 3 columns"
                    )
            elif len(fields) == 2:
                raise ParseError(lineno, "missing timestamp column")
            elif len(fields) == 3:
                timestamp = float(fields[2])
            else:
                weight = float(fields[2])
                timestamp = float(fields[3])
        except ParseError:
            raise
        except ValueError:
            raise ParseError(lineno, f"non-numeric field in {fields!r}") from None
        if not math.isfinite(weight) or weight < 0:
            raise ParseError(lineno, f"negative or non-finite weight {weight}")
        if not math.isfinite(timestamp) or timestamp < 0:
            raise ParseError(lineno, f"negative or non-finite timestamp {timestamp}")
        edges.append(TemporalEdge(src, dst, weight, timestamp))
    return edges, labels


def build_snapshots(edges, interval_length, labels=None, symmetrize=False):
    """Window edges into a :class:`SnapshotSeries`.

    Snapshot ``t`` collects edges with timestamps in the half-open interval
    ``[t_min + t*D, t_min + (t+1)*D)``; the last timestamp falls on an
    inclusive boundary.  Parallel edges within a snapshot are merged by
    summing weights, self-loops are dropped (and counted), and empty
    intervals are retained as empty snapshots.
    """
    check_positive(interval_length, "interval_length")
    if not edges:
        raise ValueError("edges must be nonempty")
    src = np.array([e.source for e in edges], dtype=np.int64)
    dst = np.array([e.target for e in edges], dtype=np.int64)
    wts = np.array([e.weight for e in edges], dtype=np.float64)
    ts = np.array([e.timestamp for e in edges], dtype=np.float64)

    if labels is None:
        labels = list(range(int(max(src.max(), dst.max())) + 1))
    n = len(labels)

    t_min = float(ts.min())
    idx = np.floor((ts - t_min) / interval_length).astype(np.int64)
    n_snapshots = int(np.floor((ts.max() - t_min) / interval_length)) + 1
    idx = np.minimum(idx, n_snapshots - 1)  # guard float round-up at the boundary

    loops = src == dst
    dropped = int(loops.sum())

    snapshots = []
    for t in range(n_snapshots):
        mask = (idx == t) & ~loops
        s, d, w = src[mask], dst[mask], wts[mask]
        if symmetrize:
            s, d = np.concatenate([s, d]), np.concatenate([d, s])
            w = np.concatenate([w, w])
        active = np.unique(np.concatenate([s, d])) if len(s) else np.array([], dtype=np.int64)
        remap = np.zeros(n, dtype=np.int64)
        remap[active] = np.arange(len(active))
        adj = sp.coo_matrix(
            (w, (remap[s], remap[d])), shape=(len(active), len(active))
        ).tocsr()
        adj.sum_duplicates()
        snapshots.append(Snapshot(index=t, active_nodes=active, adjacency=adj))

    return SnapshotSeries(
        labels=list(labels),
        snapshots=snapshots,
        interval_length=float(interval_length),
        t_min=t_min,
        dropped_self_loops=dropped,
        n_input_edges=len(edges),
    )


def ingest(stream, interval_length=1.0, static=False, symmetrize=False):
    """Parse and window in one step."""
    edges, labels = parse_edge_list(stream, static=static)
    return build_snapshots(edges, interval_length, labels=labels, symmetrize=symmetrize)
