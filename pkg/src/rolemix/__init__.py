"""Behavioral role mining for large dynamic networks.

Pipeline: edge lists are windowed into snapshots, recursive structural
features are extracted per snapshot, nonnegative factorization turns them
into mixed role memberships with an explicit inactive state, and transition
models over the membership series drive prediction, anomaly detection,
clustering and role interpretation.
"""

from .anomaly import (AnomalyScores, AnomalyTimeSeries, anomaly_scores,
                      anomaly_timeseries, batch_node_models, detection_hit,
                      node_transition_model, sustained_departure_scores)
from .estimators import (NodeAnomalyScorer, RecursiveFeatureTransformer,
                         RoleTransformer, TransitionPredictor)
from .features import (FeatureDefinition, FeatureMatrix, FeatureMatrixSeries,
                       base_features, discover_features, evaluate_features,
                       prune_correlated, recursive_aggregate)
from .nmf import nmf_factorize, nnls_fit, select_rank
from .prediction import (evaluate_series, frobenius_loss, predict_avg_role,
                         predict_prev_role, predict_transition_model, total_auc)
from .roles import (MembershipMatrix, MembershipSeries, RoleBasis,
                    build_membership_series, fit_memberships)
from .synthetic import (AnomalySpec, GeneratorConfig, contingency, generate,
                        validate_patterns)
from .temporal import (ParseError, Snapshot, SnapshotSeries, TemporalEdge,
                       build_snapshots, ingest, parse_edge_list)
from .transitions import (KernelSpec, TransitionMatrix, estimate_transition,
                          stacked_transition, summary_snapshot,
                          summary_transition)

__version__ = "0.1.0"

__all__ = [
    "AnomalyScores", "AnomalySpec", "AnomalyTimeSeries", "FeatureDefinition",
    "FeatureMatrix", "FeatureMatrixSeries", "GeneratorConfig", "KernelSpec",
    "MembershipMatrix", "MembershipSeries", "NodeAnomalyScorer", "ParseError",
    "RecursiveFeatureTransformer", "RoleBasis", "RoleTransformer", "Snapshot",
    "SnapshotSeries", "TemporalEdge", "TransitionMatrix", "TransitionPredictor",
    "anomaly_scores", "anomaly_timeseries", "base_features", "batch_node_models",
    "build_membership_series",
    "build_snapshots", "contingency", "detection_hit", "discover_features",
    "estimate_transition",
    "evaluate_features", "evaluate_series", "fit_memberships", "frobenius_loss",
    "generate", "ingest", "nmf_factorize", "nnls_fit", "node_transition_model",
    "parse_edge_list", "predict_avg_role", "predict_prev_role",
    "predict_transition_model", "prune_correlated", "recursive_aggregate",
    "select_rank", "stacked_transition", "summary_snapshot", "summary_transition",
    "sustained_departure_scores", "total_auc", "validate_patterns",
]
