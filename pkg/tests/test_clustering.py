from __future__ import annotations

import numpy as np
import pytest
from hypothesis import given, settings
from hypothesis import strategies as st

from vlcp import KMeansParams, image_prototypes, kmeans_fit, kmeans_pp_init

from oracles import exhaustive_bipartition_inertia


def two_blobs(seed: int = 123, radius: float = 0.05, n_blob: int = 30) -> np.ndarray:
    """Two tight blobs separated by 100x their radius."""
    rng = np.random.default_rng(seed)
    a = rng.normal(scale=radius / 2, size=(n_blob, 3))
    b = rng.normal(scale=radius / 2, size=(n_blob, 3)) + np.array([100 * radius, 0.0, 0.0])
    return np.vstack([a, b]).astype(np.float32)


class TestKMeansPlusPlusInit:
    def test_c_equals_n_is_permutation(self):
        rng = np.random.default_rng(5)
        pts = rng.normal(size=(7, 3)).astype(np.float32)
        centers = kmeans_pp_init(pts, 7, seed=99)
        assert sorted(map(tuple, centers.tolist())) == sorted(map(tuple, pts.tolist()))

    def test_c_one_is_seed_stable(self):
        rng = np.random.default_rng(6)
        pts = rng.normal(size=(10, 2)).astype(np.float32)
        first = kmeans_pp_init(pts, 1, seed=42)
        second = kmeans_pp_init(pts, 1, seed=42)
        assert np.array_equal(first, second)
        assert any(np.array_equal(first[0], row) for row in pts)

    def test_separated_blobs_split_across_all_seeds(self):
        pts = two_blobs()
        midpoint = 2.5
        for seed in range(100):
            centers = kmeans_pp_init(pts, 2, seed)
            sides = {bool(c[0] > midpoint) for c in centers}
            assert len(sides) == 2, f"seed {seed} put both initial centers in one blob"

    def test_duplicate_rows_still_yield_c_rows(self):
        dup = np.array([[1.0], [1.0], [1.0]], dtype=np.float32)
        assert kmeans_pp_init(dup, 3, 0).ravel().tolist() == [1.0, 1.0, 1.0]
        assert kmeans_pp_init(dup, 2, 7).ravel().tolist() == [1.0, 1.0]

    def test_c_exceeding_n_rejected(self):
        with pytest.raises(ValueError, match="exceeds"):
            kmeans_pp_init(np.zeros((3, 2), dtype=np.float32), 4, 0)


class TestKMeansFit:
    def test_symmetric_square(self):
        pts = np.array([[0, 0], [0, 1], [10, 0], [10, 1]], dtype=np.float32)
        result = kmeans_fit(pts, KMeansParams(n_clusters=2, seed=0))
        assert sorted(map(tuple, result.centers.tolist())) == [(0.0, 0.5), (10.0, 0.5)]
        assert result.inertia == pytest.approx(1.0, rel=1e-12)

    def test_single_cluster_is_mean(self):
        rng = np.random.default_rng(8)
        pts = rng.normal(size=(15, 4)).astype(np.float32)
        result = kmeans_fit(pts, KMeansParams(n_clusters=1, seed=3))
        expected = pts.astype(np.float64).mean(axis=0).astype(np.float32)
        assert np.array_equal(result.centers[0], expected)
        total = ((pts.astype(np.float64) - expected.astype(np.float64)) ** 2).sum()
        assert result.inertia == pytest.approx(total, rel=1e-12)

    def test_no_empty_clusters_and_local_optimality(self):
        rng = np.random.default_rng(21)
        for trial in range(20):
            pts = rng.normal(size=(rng.integers(6, 30), 3)).astype(np.float32)
            c = int(rng.integers(1, min(6, len(pts)) + 1))
            result = kmeans_fit(pts, KMeansParams(n_clusters=c, seed=trial))
            counts = np.bincount(result.assignments, minlength=c)
            assert np.all(counts >= 1)
            x = pts.astype(np.float64)
            centers = result.centers.astype(np.float64)
            d2 = ((x[:, None, :] - centers[None, :, :]) ** 2).sum(axis=2)
            assigned = d2[np.arange(len(pts)), result.assignments]
            assert np.all(assigned <= d2.min(axis=1) + 1e-12)
            assert result.inertia == pytest.approx(assigned.sum(), rel=1e-9)

    def test_deterministic_bytes(self):
        rng = np.random.default_rng(13)
        pts = rng.normal(size=(25, 5)).astype(np.float32)
        params = KMeansParams(n_clusters=4, seed=777)
        a = kmeans_fit(pts, params)
        b = kmeans_fit(pts, params)
        assert a.assignments.tobytes() == b.assignments.tobytes()
        assert a.centers.tobytes() == b.centers.tobytes()
        assert a.inertia == b.inertia
        assert a.iterations_run == b.iterations_run

    def test_permutation_with_relabel_matches_on_blobs(self):
        pts = two_blobs(seed=9)
        perm = np.random.default_rng(10).permutation(len(pts))
        base = kmeans_fit(pts, KMeansParams(n_clusters=2, seed=1))
        permuted = kmeans_fit(pts[perm], KMeansParams(n_clusters=2, seed=2))
        assert sorted(map(tuple, base.centers.tolist())) == sorted(map(tuple, permuted.centers.tolist()))
        assert base.inertia == pytest.approx(permuted.inertia, rel=1e-9)

    def test_empty_cluster_repair(self):
        pts = np.array([[0.0], [1.0], [9.0], [10.0]], dtype=np.float32)
        # Both injected centers start nearer to nothing: cluster 1 begins empty.
        result = kmeans_fit(
            pts,
            KMeansParams(n_clusters=2, seed=0),
            init_centers=np.array([[5.0], [100.0]], dtype=np.float32),
        )
        assert sorted(result.centers.ravel().tolist()) == [0.5, 9.5]
        assert result.inertia == pytest.approx(1.0, rel=1e-12)

    def test_restarts_reach_exhaustive_optimum(self):
        rng = np.random.default_rng(31)
        for trial in range(10):
            pts = rng.normal(size=(8, 2)).astype(np.float32)
            best = kmeans_fit(pts, KMeansParams(n_clusters=2, seed=trial, n_restarts=50))
            optimal = exhaustive_bipartition_inertia(pts)
            assert best.inertia == pytest.approx(optimal, rel=1e-9)

    def test_c_exceeding_rows_rejected(self):
        with pytest.raises(ValueError, match="exceeds"):
            kmeans_fit(np.zeros((2, 2), dtype=np.float32), KMeansParams(n_clusters=3, seed=0))


class TestImagePrototypes:
    def test_prototype_per_cluster_in_order(self):
        rng = np.random.default_rng(17)
        pts = rng.normal(size=(20, 8)).astype(np.float32)
        result = kmeans_fit(pts, KMeansParams(n_clusters=3, seed=5))
        protos = image_prototypes(result, (2, 2, 2))
        assert [p.cluster_id for p in protos] == [0, 1, 2]
        assert all(p.vector.shape == (8,) for p in protos)
        assert sum(p.member_count for p in protos) == 20

    def test_prototype_equals_member_mean(self):
        rng = np.random.default_rng(18)
        pts = rng.normal(size=(30, 4)).astype(np.float32)
        result = kmeans_fit(pts, KMeansParams(n_clusters=4, seed=6))
        protos = image_prototypes(result, (4,))
        for p in protos:
            members = pts[result.assignments == p.cluster_id].astype(np.float64)
            recomputed = members.mean(axis=0).astype(np.float32)
            np.testing.assert_allclose(p.vector, recomputed, rtol=1e-9, atol=0)
            assert p.vector.tobytes() == recomputed.tobytes()

    def test_shape_mismatch_rejected(self):
        pts = np.zeros((4, 6), dtype=np.float32)
        result = kmeans_fit(pts, KMeansParams(n_clusters=1, seed=0))
        with pytest.raises(ValueError, match="product"):
            image_prototypes(result, (2, 2))


@given(seed=st.integers(0, 2**32 - 1))
@settings(max_examples=25, deadline=None)
def test_inertia_never_increases_mid_run(seed):
    # kmeans_fit raises internally if any Lloyd iteration increases inertia;
    # drive it across random shapes/cluster counts to exercise that guard.
    rng = np.random.default_rng(seed)
    pts = rng.normal(size=(int(rng.integers(4, 40)), int(rng.integers(1, 6)))).astype(np.float32)
    c = int(rng.integers(1, min(8, len(pts)) + 1))
    kmeans_fit(pts, KMeansParams(n_clusters=c, seed=seed & 0xFFFF))
