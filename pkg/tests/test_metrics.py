import numpy as np
import pytest

from meshseq.creation import icosphere, tetrahedron, triangle
from meshseq.face_builder import AdjacencyMatrix
from meshseq.mesh_io import Mesh
from meshseq.metrics import (
    PointSample,
    adjacency_f1_recall,
    chamfer,
    hausdorff,
    min_dists_brute,
    nearest_dists,
    sample_surface,
    shape_scores,
)


class TestSampleSurface:
    def test_barycentric_containment(self):
        mesh = triangle()
        pts = sample_surface(mesh, 500, seed=1).points
        # inside the triangle x,y >= 0, x + y <= 1, z = 0
        assert (pts[:, 0] >= -1e-12).all()
        assert (pts[:, 1] >= -1e-12).all()
        assert (pts[:, 0] + pts[:, 1] <= 1 + 1e-12).all()
        assert np.allclose(pts[:, 2], 0.0)

    def test_area_weighting(self):
        # two triangles with area ratio 9:1
        verts = np.array(
            [[0, 0, 0], [9, 0, 0], [0, 2, 0], [10, 0, 0], [11, 0, 0], [10, 2, 0]], dtype=float
        )
        mesh = Mesh(verts, [[0, 1, 2], [3, 4, 5]])
        n = 100_000
        pts = sample_surface(mesh, n, seed=3).points
        big = (pts[:, 0] < 9.5).sum()
        p = 0.9
        sigma = np.sqrt(n * p * (1 - p))
        assert abs(big - n * p) < 3 * sigma

    def test_deterministic(self):
        mesh = tetrahedron()
        a = sample_surface(mesh, 100, seed=7).points
        b = sample_surface(mesh, 100, seed=7).points
        assert np.array_equal(a, b)
        c = sample_surface(mesh, 100, seed=8).points
        assert not np.array_equal(a, c)

    def test_zero_area(self):
        degenerate = Mesh([[0, 0, 0], [1, 0, 0], [2, 0, 0]], [[0, 1, 2]])
        with pytest.raises(ValueError):
            sample_surface(degenerate, 10, seed=0)


class TestChamferHausdorff:
    def test_identical_zero(self):
        pts = np.random.default_rng(0).normal(size=(200, 3))
        assert chamfer(pts, pts) == 0.0
        assert hausdorff(pts, pts) == 0.0

    def test_two_point_chamfer(self):
        a = np.array([[0.0, 0.0, 0.0]])
        b = np.array([[0.1, 0.0, 0.0]])
        assert chamfer(a, b) == pytest.approx(10.0, rel=1e-12)

    def test_two_point_hausdorff(self):
        a = np.array([[0.0, 0.0, 0.0], [1.0, 0.0, 0.0]])
        b = np.array([[0.0, 0.0, 0.0]])
        assert hausdorff(a, b) == pytest.approx(100.0, rel=1e-12)
        assert chamfer(a, b) == pytest.approx(100.0 * 0.5 * 0.5, rel=1e-12)

    def test_symmetry(self):
        rng = np.random.default_rng(1)
        a, b = rng.normal(size=(50, 3)), rng.normal(size=(70, 3))
        assert chamfer(a, b) == chamfer(b, a)
        assert hausdorff(a, b) == hausdorff(b, a)

    def test_hausdorff_dominates_one_sided_means(self):
        rng = np.random.default_rng(2)
        for _ in range(10):
            a, b = rng.normal(size=(40, 3)), rng.normal(size=(60, 3))
            hd = hausdorff(a, b)
            assert hd >= 100.0 * nearest_dists(a, b).mean() - 1e-12
            assert hd >= 100.0 * nearest_dists(b, a).mean() - 1e-12
            assert hd >= chamfer(a, b) - 1e-12

    def test_lipschitz_under_translation(self):
        rng = np.random.default_rng(3)
        a, b = rng.normal(size=(80, 3)), rng.normal(size=(90, 3))
        for _ in range(5):
            delta = rng.normal(size=3) * 0.05
            shift = float(np.linalg.norm(delta))
            assert abs(chamfer(a, b + delta) - chamfer(a, b)) <= 100 * shift + 1e-9
            assert abs(hausdorff(a, b + delta) - hausdorff(a, b)) <= 100 * shift + 1e-9

    def test_accepts_point_samples(self):
        sample = sample_surface(tetrahedron(), 64, seed=0)
        assert chamfer(sample, sample) == 0.0
        assert isinstance(sample, PointSample)

    def test_grid_path_matches_brute(self):
        # above BRUTE_FORCE_LIMIT nearest_dists switches to the grid kernel
        rng = np.random.default_rng(4)
        a = rng.uniform(size=(2100, 3))
        b = rng.uniform(size=(2200, 3))
        grid = nearest_dists(a, b)
        brute = min_dists_brute(a, b)
        assert np.allclose(grid, brute, atol=1e-12)


class TestShapeScores:
    def test_self_zero(self):
        mesh = icosphere(1)
        scores = shape_scores(mesh, mesh, count=500, seed=0)
        assert scores.cd == 0.0 and scores.hd == 0.0

    def test_scale_invariant_via_normalization(self):
        mesh = icosphere(1)
        scaled = Mesh(mesh.vertices * 37.5 + 4.0, mesh.faces)
        scores = shape_scores(mesh, scaled, count=500, seed=0)
        assert scores.cd < 1e-9 and scores.hd < 1e-9

    def test_deterministic(self):
        a, b = icosphere(1), tetrahedron()
        s1 = shape_scores(a, b, count=400, seed=5)
        s2 = shape_scores(a, b, count=400, seed=5)
        assert s1 == s2


class TestAdjacencyF1Recall:
    def test_perfect(self):
        adj = AdjacencyMatrix(4, np.array([[0, 1], [1, 2], [2, 3]]))
        f1, recall, precision = adjacency_f1_recall(adj, adj)
        assert f1 == recall == precision == 1.0

    def test_one_extra_edge(self):
        truth = AdjacencyMatrix(4, np.array([[0, 1], [1, 2], [2, 3]]))
        pred = AdjacencyMatrix(4, np.array([[0, 1], [1, 2], [2, 3], [0, 3]]))
        f1, recall, precision = adjacency_f1_recall(pred, truth)
        assert recall == 1.0
        assert precision == pytest.approx(0.75)
        assert f1 == pytest.approx(6 / 7)

    def test_empty_pred(self):
        truth = AdjacencyMatrix(3, np.array([[0, 1]]))
        f1, recall, precision = adjacency_f1_recall(AdjacencyMatrix(3), truth)
        assert recall == 0.0 and f1 == 0.0

    def test_empty_truth(self):
        pred_empty = AdjacencyMatrix(3)
        f1, recall, _ = adjacency_f1_recall(pred_empty, AdjacencyMatrix(3))
        assert f1 == 1.0 and recall == 1.0
        pred_full = AdjacencyMatrix(3, np.array([[0, 1]]))
        f1, recall, _ = adjacency_f1_recall(pred_full, AdjacencyMatrix(3))
        assert f1 == 0.0 and recall == 1.0

    def test_size_mismatch(self):
        with pytest.raises(ValueError):
            adjacency_f1_recall(AdjacencyMatrix(3), AdjacencyMatrix(4))
