"""CSV/JSON writers for the pipeline artifacts.

Every file carries the run's config hash: CSV files in a leading ``# config``
comment line, JSON files in a ``config_hash`` field.
"""

import csv
import hashlib
import json
from pathlib import Path

import numpy as np


def config_hash(config_dict):
    canon = json.dumps(config_dict, sort_keys=True, default=str)
    return hashlib.sha256(canon.encode()).hexdigest()[:12]


def write_csv(path, header, rows, cfg_hash=None):
    path = Path(path)
    path.parent.mkdir(parents=True, exist_ok=True)
    with open(path, "w", newline="") as fh:
        if cfg_hash:
            fh.write(f"# config {cfg_hash}\n")
        writer = csv.writer(fh)
        writer.writerow(header)
        writer.writerows(rows)


def write_json(path, payload, cfg_hash=None):
    path = Path(path)
    path.parent.mkdir(parents=True, exist_ok=True)
    if cfg_hash:
        payload = {"config_hash": cfg_hash, **payload}
    with open(path, "w") as fh:
        json.dump(payload, fh, indent=2, default=_jsonable)
        fh.write("\n")


def _jsonable(obj):
    if isinstance(obj, np.ndarray):
        return obj.tolist()
    if isinstance(obj, (np.integer, np.floating, np.bool_)):
        return obj.item()
    raise TypeError(f"not JSON serializable: {type(obj)}")


def write_feature_series(directory, features, cfg_hash=None):
    names = features.names()
    for fm in features.matrices:
        rows = [[int(node)] + [f"{v:.10g}" for v in row]
                for node, row in zip(fm.nodes, fm.values)]
        write_csv(Path(directory) / f"features_t{fm.snapshot_index:04d}.csv",
                  ["node"] + names, rows, cfg_hash)


def write_membership_series(directory, series, cfg_hash=None):
    header = ["node"] + [f"role_{k}" for k in range(series.r)] + ["inactive"]
    for mm in series.matrices:
        rows = [[i] + [f"{v:.10g}" for v in row]
                for i, row in enumerate(mm.values)]
        write_csv(Path(directory) / f"memberships_t{mm.snapshot_index:04d}.csv",
                  header, rows, cfg_hash)


def write_role_basis(path, basis, feature_names, cfg_hash=None):
    rows = [[f"role_{k}"] + [f"{v:.10g}" for v in basis.values[k]]
            for k in range(basis.n_roles)]
    write_csv(path, ["role"] + list(feature_names), rows, cfg_hash)


def write_transition_matrix(path, tm, cfg_hash=None):
    r = tm.values.shape[0] - 1
    names = [f"role_{k}" for k in range(r)] + ["inactive"]
    rows = [[names[i]] + [f"{v:.10g}" for v in tm.values[i]]
            for i in range(len(names))]
    write_csv(path, ["from\\to"] + names, rows, cfg_hash)


def transition_heatmap_payload(tm):
    r = tm.values.shape[0] - 1
    names = [f"role_{k}" for k in range(r)] + ["inactive"]
    return {"rows": names, "cols": names, "values": tm.values.tolist(),
            "scope": tm.scope, "window": tm.window}


def write_prediction_results(path, results, cfg_hash=None):
    rows = [[res.t, res.predictor, f"{res.frobenius_loss:.10g}",
             f"{res.frobenius_loss_per_sqrt_n:.10g}",
             "" if res.total_auc is None else f"{res.total_auc:.10g}"]
            for res in results]
    write_csv(path, ["t", "predictor", "frobenius_loss",
                     "frobenius_loss_per_sqrt_n", "total_auc"], rows, cfg_hash)


def write_anomaly_timeseries(path, ats, cfg_hash=None):
    rows = []
    t_max, n = ats.scores.shape
    for t in range(t_max):
        for i in range(n):
            if ats.defined[t, i]:
                rows.append([i, t, f"{ats.scores[t, i]:.10g}", 1])
            elif not np.isnan(ats.scores[t, i]):
                rows.append([i, t, "", 0])
    write_csv(path, ["node", "t", "score", "defined"], rows, cfg_hash)


def top_k_payload(scores, k, labels=None):
    ranked = scores.ranked()[:k]
    return {
        "t": scores.t_evaluated,
        "top": [{"node": int(i),
                 "label": None if labels is None else labels[int(i)],
                 "score": float(scores.scores[i])} for i in ranked],
    }


def write_edge_list(path, edges):
    path = Path(path)
    path.parent.mkdir(parents=True, exist_ok=True)
    with open(path, "w") as fh:
        for e in edges:
            fh.write(f"{e.source} {e.target} {e.weight:.10g} {e.timestamp:.10g}\n")


def write_pattern_labels(path, labels, pattern_names, cfg_hash=None):
    rows = [[i, t, pattern_names[labels[i, t]]]
            for i in range(labels.shape[0]) for t in range(labels.shape[1])]
    write_csv(path, ["node", "t", "pattern"], rows, cfg_hash)
