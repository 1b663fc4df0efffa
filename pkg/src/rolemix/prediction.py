"""Next-step membership prediction and evaluation.

The transition predictor applies the summary transition model,
``G_hat(t+1) = G_t @ T``; PrevRole repeats the previous memberships and
AvgRole assigns every node the network-average row.  Evaluation reports the
Frobenius loss of the predicted matrix and the Hand-Till multi-class AUC of
the predicted modal roles.
"""

from dataclasses import dataclass
from itertools import combinations

import numpy as np
from scipy.stats import rankdata

from .transitions import KernelSpec, summary_transition
from .validation import as_float_array, check_same_shape


class UndefinedMetricError(ValueError):
    pass


@dataclass
class PredictionResult:
    t: int
    predictor: str
    predicted: np.ndarray
    frobenius_loss: float
    frobenius_loss_per_sqrt_n: float
    total_auc: float  # None when fewer than 2 classes are present


def predict_transition_model(series, t, kernel=None):
    """Summary-transition forecast of the memberships after step t."""
    if len(series) < 2:
        raise ValueError("series must have at least 2 snapshots")
    if kernel is None:
        kernel = KernelSpec()
    T = summary_transition(series, t, kernel)
    return series.matrices[t].values @ T.values


def predict_prev_role(series, t):
    return series.matrices[t].values.copy()


def predict_avg_role(series, t):
    G = series.matrices[t].values
    if G.shape[0] == 0:
        raise ValueError("empty membership matrix")
    return np.tile(G.mean(axis=0), (G.shape[0], 1))


def frobenius_loss(G_true, G_pred):
    G_true = as_float_array(G_true, "G_true")
    G_pred = as_float_array(G_pred, "G_pred")
    check_same_shape(G_true, G_pred, ("G_true", "G_pred"))
    return float(np.linalg.norm(G_true - G_pred))


def modal_roles(G):
    """Argmax role per row; ties break toward the lowest role index."""
    return np.argmax(G, axis=1)


def _pairwise_auc(pos_scores, neg_scores):
    """P(pos > neg) with ties counting one half (Mann-Whitney).

    Computed from the rank-sum statistic rather than the pairwise outer
    product, so it stays O(n log n) in both time and memory.
    """
    n_pos, n_neg = len(pos_scores), len(neg_scores)
    ranks = rankdata(np.concatenate([pos_scores, neg_scores]))
    u = ranks[:n_pos].sum() - n_pos * (n_pos + 1) / 2.0
    return u / (n_pos * n_neg)


def total_auc(G_true, G_pred, include_inactive=True):
    """Hand-Till multi-class AUC of the predicted modal roles.

    True labels are the modal roles of ``G_true``; each class pair (i, j)
    contributes the average of A(i|j) and A(j|i), computed from the class-i
    and class-j prediction scores respectively.  Pairs involving a class with
    no instances are skipped.
    """
    G_true = as_float_array(G_true, "G_true")
    G_pred = as_float_array(G_pred, "G_pred")
    check_same_shape(G_true, G_pred, ("G_true", "G_pred"))
    if not include_inactive:
        G_true = G_true[:, :-1]
        G_pred = G_pred[:, :-1]
    labels = modal_roles(G_true)
    present = np.unique(labels)
    if len(present) < 2:
        raise UndefinedMetricError(
            f"total AUC needs >= 2 classes, found {len(present)}")
    pair_values = []
    for i, j in combinations(present, 2):
        mask_i = labels == i
        mask_j = labels == j
        a_ij = _pairwise_auc(G_pred[mask_i, i], G_pred[mask_j, i])
        a_ji = _pairwise_auc(G_pred[mask_j, j], G_pred[mask_i, j])
        pair_values.append(0.5 * (a_ij + a_ji))
    return float(np.mean(pair_values))


PREDICTORS = {
    "transition": predict_transition_model,
    "prev_role": lambda series, t, kernel=None: predict_prev_role(series, t),
    "avg_role": lambda series, t, kernel=None: predict_avg_role(series, t),
}


def evaluate_series(series, kernel=None, predictors=("transition", "prev_role",
                                                     "avg_role"),
                    include_inactive=True):
    """Run every predictor at every evaluable step; returns PredictionResults."""
    if kernel is None:
        kernel = KernelSpec()
    results = []
    for t in range(1, len(series) - 1):
        G_true = series.matrices[t + 1].values
        for name in predictors:
            pred = PREDICTORS[name](series, t, kernel=kernel)
            loss = frobenius_loss(G_true, pred)
            try:
                auc = total_auc(G_true, pred, include_inactive=include_inactive)
            except UndefinedMetricError:
                auc = None
            results.append(PredictionResult(
                t=t, predictor=name, predicted=pred, frobenius_loss=loss,
                frobenius_loss_per_sqrt_n=loss / np.sqrt(G_true.shape[0]),
                total_auc=auc))
    return results
