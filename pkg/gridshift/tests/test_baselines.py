"""Unit tests for MS++ and the brute-force oracles (gridshift.services.baselines)."""

import numpy as np
import pytest

from gridshift.errors import InvalidParameterError, OracleScaleError
from gridshift.models.clustering import KernelParams
from gridshift.services import baselines, datasets, engine
from gridshift.services.metrics import agreement


def _separated(seed=0):
    rng = np.random.default_rng(seed)
    a = 0.05 + rng.uniform(-0.02, 0.02, size=(25, 2))
    b = 0.65 + rng.uniform(-0.02, 0.02, size=(15, 2))
    return np.vstack([a, b])


class TestCellDistance:
    def test_chebyshev_over_indices(self):
        assert baselines.cell_distance([0.1, 0.1], [0.6, 1.6], 0.5) == 3
        assert baselines.cell_distance([0.1], [0.45], 0.5) == 0

    def test_vectorized(self):
        d = baselines.cell_distance([0.0], np.array([[0.2], [0.9], [-0.3]]), 0.5)
        assert d.tolist() == [0.0, 1.0, 1.0]


class TestMSPP:
    def test_parallel_step_uses_old_positions(self):
        positions = np.array([[0.4], [0.4], [0.4], [0.6]])
        new_positions, m = baselines.mspp_step(positions, 0.5)

        assert m == 2
        assert new_positions[:, 0] == pytest.approx([0.45, 0.45, 0.45, 0.45])

    def test_single_point(self):
        labeling = baselines.mspp_run([[0.3, 0.9]], 0.1)

        assert labeling.n_clusters == 1
        assert labeling.converged
        assert labeling.centroids == pytest.approx(np.array([[0.3, 0.9]]))

    def test_two_groups_match_engine(self):
        X = _separated()
        ms = baselines.mspp_run(X, 0.1)
        gs = engine.cluster(X, 0.1)

        assert ms.n_clusters == 2
        assert agreement(gs.labels, ms.labels).ari == pytest.approx(1.0)

    def test_iteration_cap(self):
        X = np.linspace(0.0, 3.0, 61).reshape(-1, 1)
        labeling = baselines.mspp_run(X, 0.1, max_iter=1)

        assert labeling.iterations == 1
        assert not labeling.converged

    def test_rejects_bad_parameters(self):
        with pytest.raises(InvalidParameterError):
            baselines.mspp_run([[0.1]], 0.1, tol=0.0)
        with pytest.raises(InvalidParameterError):
            baselines.mspp_run([[0.1]], 0.1, max_iter=0)


class TestBruteForceShift:
    def test_example(self):
        out = baselines.brute_force_shift([0.5], [0.2, 0.8, 5.0], 1.0)
        assert out == pytest.approx([0.5])

    def test_fixed_point(self):
        X = np.array([[0.1, 0.1], [0.3, 0.3]])
        assert baselines.brute_force_shift([0.2, 0.2], X, 1.0) == pytest.approx([0.2, 0.2])

    def test_empty_neighborhood_returns_z(self):
        out = baselines.brute_force_shift([10.0], [0.2, 0.8], 1.0)
        assert out.tolist() == [10.0]

    @pytest.mark.parametrize("seed", range(20))
    def test_matches_mspp_step_for_every_point(self, seed):
        rng = np.random.default_rng(seed)
        n = int(rng.integers(20, 201))
        d = int(rng.integers(1, 4))
        h = float(rng.uniform(0.05, 0.4))
        X = rng.uniform(0, 1, size=(n, d))
        step, _ = baselines.mspp_step(X.copy(), h)
        for i in range(n):
            assert step[i] == pytest.approx(baselines.brute_force_shift(X[i], X, h), rel=1e-9, abs=1e-12)


class TestVanillaMS:
    def test_single_point(self):
        labeling = baselines.vanilla_ms_run([[0.5]], 0.2)

        assert labeling.n_clusters == 1
        assert labeling.centroids.tolist() == [[0.5]]

    def test_two_groups(self):
        labeling = baselines.vanilla_ms_run(_separated(3), 0.1)

        assert labeling.n_clusters == 2
        assert labeling.converged

    def test_refuses_above_cap(self):
        with pytest.raises(OracleScaleError):
            baselines.vanilla_ms_run(np.zeros((11, 1)), 0.1, max_points=10)

    def test_cap_from_settings(self, monkeypatch):
        monkeypatch.setenv("GRIDSHIFT_VANILLA_MS_MAX_POINTS", "5")
        with pytest.raises(OracleScaleError):
            baselines.vanilla_ms_run(np.zeros((6, 1)), 0.1)

    def test_step_matches_brute_force(self):
        X = np.random.default_rng(9).uniform(0, 1, size=(40, 3))
        step = baselines.vanilla_ms_step(X.copy(), X, 0.3)
        for i in range(40):
            assert step[i] == pytest.approx(baselines.brute_force_shift(X[i], X, 0.3))


class TestKdeLoss:
    def test_example(self):
        loss = baselines.kde_loss([0.25], [([0.0], 2), ([0.5], 1)], h=1.0, a=100.0, n_total=3)
        assert loss == pytest.approx(0.1875)

    def test_all_refs_outside(self):
        loss = baselines.kde_loss([0.25], [([5.0], 2), ([-7.0], 1)], h=1.0, a=100.0, n_total=3)
        assert loss == 300.0

    def test_single_ref_at_z(self):
        assert baselines.kde_loss([0.4, 0.4], [([0.4, 0.4], 5)], h=0.5, a=1.0, n_total=5) == 0.0

    def test_no_refs(self):
        assert baselines.kde_loss([0.1], [], h=1.0, a=2.0, n_total=4) == 8.0

    def test_default_flat_constant(self):
        loss = baselines.kde_loss([0.25], [([0.0], 2), ([0.5], 1)], h=1.0, n_total=4)
        assert loss == 0.1875 + 9.0
        assert baselines.kde_loss([0.1, 0.1], [], h=0.5, n_total=2) == 2 * 4.5
        assert KernelParams.default_for(0.5, 2).a == 4.5

    def test_a_too_small(self):
        with pytest.raises(InvalidParameterError):
            baselines.kde_loss([0.0], [([0.9], 1)], h=1.0, a=0.5, n_total=1)

    def test_nonpositive_a(self):
        with pytest.raises(InvalidParameterError):
            baselines.kde_loss([0.0], [([0.1], 1)], h=1.0, a=0.0, n_total=1)

    def test_weights_above_total(self):
        with pytest.raises(InvalidParameterError):
            baselines.kde_loss([0.0], [([0.1], 3)], h=1.0, a=1.0, n_total=2)

    def test_explicit_neighborhood(self):
        refs = [([0.0], 1), ([3.0], 1)]
        # second ref is three cells away but forced into the neighborhood
        loss = baselines.kde_loss([0.0], refs, h=1.0, a=10.0, n_total=2, neighborhood=[1])
        assert loss == pytest.approx(9.0 + 10.0)

    def test_weighted_loss_array_form(self):
        points = np.array([[0.0], [0.5]])
        loss = baselines.weighted_loss(np.array([0.25]), points, np.array([2.0, 1.0]), 100.0, 3)
        assert loss == pytest.approx(0.1875)


@pytest.mark.parametrize("seed", range(5))
@pytest.mark.parametrize("d", [1, 2, 3])
def test_separated_groups_get_identical_labels_from_all_algorithms(seed, d):
    h = 0.1
    ds = datasets.separated_groups([30, 12, 45], d, h, seed=seed)

    gs = engine.cluster(ds.X, h)
    ms = baselines.mspp_run(ds.X, h)
    vanilla = baselines.vanilla_ms_run(ds.X, h)

    assert gs.labels.tolist() == ds.labels.tolist()
    assert ms.labels.tolist() == ds.labels.tolist()
    assert vanilla.labels.tolist() == ds.labels.tolist()
