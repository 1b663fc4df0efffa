import numpy as np
import pytest

from rolemix.features import discover_features
from rolemix.roles import (MembershipSeries, build_membership_series,
                           embed_membership, fit_memberships)

from conftest import make_series, star_edges


class TestEmbedMembership:
    def test_inactive_rows(self):
        G = np.array([[1.0, 2.0], [3.0, 1.0]])
        mm, fallback = embed_membership(G, np.array([1, 3]), 5, 0)
        assert mm.values.shape == (5, 3)
        for absent in (0, 2, 4):
            np.testing.assert_array_equal(mm.values[absent], [0, 0, 1])
        assert fallback == 0

    def test_active_rows_normalized(self):
        G = np.array([[1.0, 3.0]])
        mm, _ = embed_membership(G, np.array([0]), 2, 0)
        np.testing.assert_allclose(mm.values[0], [0.25, 0.75, 0.0])
        assert mm.values[0, :2].sum() == 1.0

    def test_zero_row_uniform_fallback(self):
        G = np.array([[0.0, 0.0], [2.0, 0.0]])
        mm, fallback = embed_membership(G, np.array([0, 1]), 2, 0)
        assert fallback == 1
        np.testing.assert_allclose(mm.values[0], [0.5, 0.5, 0.0])

    def test_activity_side_channel(self):
        G = np.array([[1.0, 3.0]])
        mm, _ = embed_membership(G, np.array([0]), 1, 0)
        np.testing.assert_allclose(mm.activity, [4.0])

    def test_unnormalized_mode(self):
        G = np.array([[1.0, 3.0]])
        mm, _ = embed_membership(G, np.array([0]), 1, 0, normalize=False)
        np.testing.assert_allclose(mm.values[0], [1.0, 3.0, 0.0])


@pytest.fixture(scope="module")
def features():
    edges = []
    for t in range(4):
        edges += star_edges(5, ts=float(t))
        edges += [(6, 7, 1.0, float(t)), (7, 8, 1.0, float(t)),
                  (8, 6, 1.0, float(t))]
    return discover_features(make_series(edges))


class TestBuildMembershipSeries:
    def test_fixed_rank_shapes(self, features):
        series, basis = build_membership_series(features, r=2)
        assert series.r == 2
        assert basis.values.shape == (2, features.n_features)
        assert len(series) == 4
        for mm in series.matrices:
            assert mm.values.shape == (9, 3)
            active = mm.values[:, -1] == 0
            np.testing.assert_allclose(mm.values[active].sum(axis=1), 1.0)

    def test_rows_nonnegative(self, features):
        series, _ = build_membership_series(features, r=2)
        for mm in series.matrices:
            assert (mm.values >= 0).all()

    def test_mdl_selection_populates_curve(self, features):
        series, _ = build_membership_series(features, r_range=[1, 2, 3])
        assert series.r in (1, 2, 3)
        assert [c["r"] for c in series.mdl_curve] == [1, 2, 3]

    def test_fixed_rank_skips_curve(self, features):
        series, _ = build_membership_series(features, r=2)
        assert series.mdl_curve == []

    def test_stacked_returns_views(self, features):
        series, _ = build_membership_series(features, r=2)
        stacked = series.stacked()
        assert len(stacked) == len(series)
        assert stacked[0].shape == (9, 3)

    def test_frozen_basis_on_new_data(self, features):
        series, basis = build_membership_series(features, r=2)
        refit = fit_memberships(features, basis)
        assert refit.r == 2
        for a, b in zip(series.matrices, refit.matrices):
            np.testing.assert_allclose(a.values, b.values, atol=1e-8)

    def test_reconstruction_beats_trivial_baseline(self, features):
        series, basis = build_membership_series(features, r=3,
                                                normalize=False)
        V = features.matrices[0].values
        G = series.matrices[0].values[features.matrices[0].nodes, :3]
        resid = np.linalg.norm(V - G @ basis.values)
        baseline = np.linalg.norm(V - V.mean(axis=0))
        assert resid < baseline

    def test_empty_feature_series_rejected(self, features):
        empty = type(features)(definitions=features.definitions,
                               matrices=[], n_nodes=features.n_nodes)
        with pytest.raises(ValueError):
            build_membership_series(empty, r=2)


def test_membership_series_len_and_nodes():
    from rolemix.roles import MembershipMatrix
    mats = [MembershipMatrix(t, np.full((4, 3), 1 / 3)) for t in range(2)]
    series = MembershipSeries(mats, r=2)
    assert len(series) == 2
    assert series.n_nodes == 4
