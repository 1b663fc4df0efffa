"""Sklearn-style estimators wrapping the pipeline stages.

These compose with the wider scikit-learn ecosystem (``get_params`` /
``set_params`` work as usual); the underlying functional API lives in the
stage modules.
"""

from sklearn.base import BaseEstimator, TransformerMixin

from . import anomaly, features, prediction, roles, transitions


class RecursiveFeatureTransformer(BaseEstimator, TransformerMixin):
    """Discover recursive structural features on fit, evaluate on transform.

    ``fit`` freezes the feature definition list on the given snapshot series;
    ``transform`` evaluates that exact list on any series, so all outputs
    share one column space.
    """

    def __init__(self, p=0.5, s=0, max_generation=4, reference="concat",
                 log_transform=False, workers=1):
        self.p = p
        self.s = s
        self.max_generation = max_generation
        self.reference = reference
        self.log_transform = log_transform
        self.workers = workers

    def fit(self, series, y=None):
        self.definitions_ = features.discover_definitions(
            series, p=self.p, s=self.s, max_generation=self.max_generation,
            reference=self.reference)
        return self

    def transform(self, series):
        return features.evaluate_features(series, self.definitions_,
                                          log_transform=self.log_transform,
                                          workers=self.workers)


class RoleTransformer(BaseEstimator, TransformerMixin):
    """Learn a global role basis on fit, emit membership series on transform.

    ``n_roles=None`` selects the rank by MDL over ``rank_range``.
    """

    def __init__(self, n_roles=None, rank_range=None, bits=0.25, seed=0,
                 restarts=5, tol=1e-6, max_iter=500, normalize=True):
        self.n_roles = n_roles
        self.rank_range = rank_range
        self.bits = bits
        self.seed = seed
        self.restarts = restarts
        self.tol = tol
        self.max_iter = max_iter
        self.normalize = normalize

    def fit(self, feature_series, y=None):
        series, basis = roles.build_membership_series(
            feature_series, r=self.n_roles, r_range=self.rank_range,
            bits=self.bits, seed=self.seed, restarts=self.restarts,
            tol=self.tol, max_iter=self.max_iter, normalize=self.normalize)
        self.basis_ = basis
        self.n_roles_ = series.r
        self.mdl_curve_ = series.mdl_curve
        self._fit_series = series
        self._fit_input = feature_series
        return self

    def transform(self, feature_series):
        if feature_series is self._fit_input:
            return self._fit_series
        return roles.fit_memberships(feature_series, self.basis_,
                                     normalize=self.normalize)

    def fit_transform(self, feature_series, y=None):
        return self.fit(feature_series).transform(feature_series)


class TransitionPredictor(BaseEstimator):
    """Summary-model next-step membership predictor."""

    def __init__(self, kernel="exponential", theta=0.7, window=10):
        self.kernel = kernel
        self.theta = theta
        self.window = window

    def _kernel(self):
        return transitions.KernelSpec(kind=self.kernel, theta=self.theta,
                                      window=self.window)

    def fit(self, membership_series, y=None):
        self.series_ = membership_series
        return self

    def predict(self, t=None):
        if t is None:
            t = len(self.series_) - 1
        return prediction.predict_transition_model(self.series_, t,
                                                   kernel=self._kernel())

    def score(self, t):
        """Negative Frobenius loss against the actual step t+1."""
        pred = self.predict(t)
        actual = self.series_.matrices[t + 1].values
        return -prediction.frobenius_loss(actual, pred)


class NodeAnomalyScorer(BaseEstimator):
    """Per-node transition-divergence anomaly scoring."""

    def __init__(self, window=5, per_row=True):
        self.window = window
        self.per_row = per_row

    def fit(self, membership_series, y=None):
        self.series_ = membership_series
        return self

    def score_at(self, t):
        return anomaly.anomaly_scores(self.series_, t, per_row=self.per_row)

    def score_series(self):
        return anomaly.anomaly_timeseries(self.series_, window_a=self.window,
                                          per_row=self.per_row)
