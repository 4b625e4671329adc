import json

import numpy as np
import pytest

from meshseq.creation import grid_patch, triangle, wavy_patch
from meshseq.edge_model import (
    KnnHeuristicScorer,
    ModelScorer,
    OracleScorer,
    ToyEdgeModel,
    _forward_backward,
    all_pairs,
    asymmetric_loss,
    asymmetric_loss_grad,
    cross_entropy,
    edge_feature,
    l1_loss,
    pair_labels,
    score_pairs,
    sigmoid,
    spacetime_distance,
    train_toy,
)
from meshseq.errors import OutOfRangeError
from meshseq.face_builder import adjacency_of, threshold
from meshseq.filtering import CandidateMask
from meshseq.mesh_io import Mesh, normalize
from meshseq.metrics import adjacency_f1_recall


class TestSpacetimeDistance:
    def test_identical_inputs(self):
        u = np.array([1.0, 2.0, 3.0, 4.0])
        assert spacetime_distance(u, u) == 0.0

    def test_first_half_positive(self):
        assert spacetime_distance([3, 4, 0, 0], [0, 0, 0, 0]) == 25.0

    def test_second_half_negative(self):
        assert spacetime_distance([0, 0, 3, 4], [0, 0, 0, 0]) == -25.0

    def test_exact_symmetry(self):
        rng = np.random.default_rng(0)
        for _ in range(1000):
            d = 2 * int(rng.integers(1, 8))
            u, v = rng.normal(size=d), rng.normal(size=d)
            assert spacetime_distance(u, v) == spacetime_distance(v, u)

    def test_sign_split_extension(self):
        # extending one half (zero-padding the other to keep the split
        # aligned) moves the output monotonically: + for the first half,
        # - for the second
        rng = np.random.default_rng(1)
        for _ in range(200):
            h = int(rng.integers(1, 6))
            k = int(rng.integers(1, 4))
            u, v = rng.normal(size=2 * h), rng.normal(size=2 * h)
            base = spacetime_distance(u, v)
            a, b = rng.normal(size=k), rng.normal(size=k)
            zeros = np.zeros(k)
            u1 = np.concatenate([u[:h], a, u[h:], zeros])
            v1 = np.concatenate([v[:h], b, v[h:], zeros])
            assert spacetime_distance(u1, v1) >= base
            u2 = np.concatenate([u[:h], zeros, u[h:], a])
            v2 = np.concatenate([v[:h], zeros, v[h:], b])
            assert spacetime_distance(u2, v2) <= base

    def test_errors(self):
        with pytest.raises(ValueError):
            spacetime_distance([1, 2, 3], [1, 2, 3])
        with pytest.raises(ValueError):
            spacetime_distance([1, 2], [1, 2, 3, 4])


class TestEdgeFeature:
    def test_identical_is_zero(self):
        u = np.arange(8.0).reshape(2, 4)
        assert np.array_equal(edge_feature(u, u), np.zeros(2))

    def test_per_head_values(self):
        u = np.array([[3.0, 4.0, 0.0, 0.0], [0.0, 0.0, 3.0, 4.0]])
        v = np.zeros((2, 4))
        assert edge_feature(u, v).tolist() == [25.0, -25.0]

    def test_swap_symmetric(self):
        rng = np.random.default_rng(2)
        u, v = rng.normal(size=(4, 6)), rng.normal(size=(4, 6))
        assert np.array_equal(edge_feature(u, v), edge_feature(v, u))

    def test_shape_errors(self):
        with pytest.raises(ValueError):
            edge_feature(np.zeros((2, 4)), np.zeros((3, 4)))
        with pytest.raises(ValueError):
            edge_feature(np.zeros((2, 3)), np.zeros((2, 3)))


class TestLosses:
    def test_perfect_positive(self):
        assert asymmetric_loss(1.0, 1) < 1e-6

    def test_positive_half(self):
        assert asymmetric_loss(0.5, 1, 0.0, 3.0) == pytest.approx(0.6931472, rel=1e-6)

    def test_negative_half_gamma3(self):
        assert asymmetric_loss(0.5, 0, 0.0, 3.0) == pytest.approx(0.0866434, rel=1e-5)

    def test_zero_gammas_is_bce(self):
        rng = np.random.default_rng(3)
        p = rng.uniform(0.01, 0.99, size=200)
        y = rng.integers(0, 2, size=200)
        got = asymmetric_loss(p, y, 0.0, 0.0)
        bce = -(y * np.log(p) + (1 - y) * np.log(1 - p))
        assert np.allclose(got, bce, rtol=1e-12)

    def test_negative_gamma_rejected(self):
        with pytest.raises(ValueError):
            asymmetric_loss(0.5, 1, -1.0, 0.0)
        with pytest.raises(ValueError):
            asymmetric_loss_grad(0.5, 0, 0.0, -2.0)

    def test_cross_entropy_uniform(self):
        assert cross_entropy(np.zeros(4610), 17) == pytest.approx(np.log(4610), rel=1e-12)

    def test_cross_entropy_two_way(self):
        assert cross_entropy(np.array([1.0, 1.0]), 0) == pytest.approx(np.log(2), rel=1e-12)

    def test_cross_entropy_confident(self):
        logits = np.full(10, -50.0)
        logits[3] = 50.0
        assert cross_entropy(logits, 3) < 1e-12

    def test_cross_entropy_bad_index(self):
        with pytest.raises(ValueError):
            cross_entropy(np.zeros(3), 3)

    def test_l1(self):
        assert l1_loss([[1.0, 0, 0]], [[0.0, 0, 0]]) == 1.0
        assert l1_loss([[1, 2, 3]], [[1, 2, 3]]) == 0.0
        a = np.random.default_rng(4).normal(size=(7, 3))
        b = np.random.default_rng(5).normal(size=(7, 3))
        assert l1_loss(a, b) == l1_loss(b, a)
        with pytest.raises(ValueError):
            l1_loss(np.zeros((2, 3)), np.zeros((3, 3)))


def fd_loss_grad(z, label, gp, gn, h=1e-4):
    up = asymmetric_loss(sigmoid(z + h), label, gp, gn)
    dn = asymmetric_loss(sigmoid(z - h), label, gp, gn)
    return (up - dn) / (2 * h)


class TestLossGradient:
    def test_bce_positive_closed_form(self):
        rng = np.random.default_rng(6)
        z = rng.uniform(-4, 4, size=100)
        p = sigmoid(z)
        assert np.allclose(asymmetric_loss_grad(p, np.ones(100), 0.0, 0.0), p - 1, rtol=1e-12)
        assert np.allclose(asymmetric_loss_grad(p, np.zeros(100), 0.0, 0.0), p, rtol=1e-12)

    def test_saturated_negative_vanishes(self):
        p = sigmoid(-30.0)
        assert abs(asymmetric_loss_grad(p, 0, 0.0, 3.0)) < 1e-12

    def test_matches_finite_differences(self):
        rng = np.random.default_rng(7)
        for _ in range(200):
            z = float(rng.uniform(-4, 4))
            label = int(rng.integers(0, 2))
            gp, gn = float(rng.uniform(0, 5)), float(rng.uniform(0, 5))
            analytic = asymmetric_loss_grad(sigmoid(z), label, gp, gn)
            fd = fd_loss_grad(z, label, gp, gn)
            rel = abs(analytic - fd) / max(abs(analytic), abs(fd), 1e-10)
            assert rel < 1e-5


def model_gradcheck(param_names, n_coords, seed, rel_tol=1e-5, h=1e-4):
    """Central-difference check of _forward_backward on random coordinates."""
    rng = np.random.default_rng(seed)
    model = ToyEdgeModel.init(heads=3, dims=4, hidden=10, head_hidden=6, seed=seed)
    x = rng.uniform(0.05, 0.95, size=(12, 3))
    pairs = all_pairs(12)
    labels = (rng.random(len(pairs)) < 0.3).astype(float)

    def mean_loss():
        logits = model.pair_logits(x, pairs)
        return float(np.mean(asymmetric_loss(sigmoid(logits), labels, 0.0, 3.0)))

    _, grads = _forward_backward(model, x, pairs, labels, 0.0, 3.0, 1.0 / len(pairs))
    worst = 0.0
    for _ in range(n_coords):
        name = param_names[int(rng.integers(0, len(param_names)))]
        value = getattr(model, name)
        if np.isscalar(value) or np.ndim(value) == 0:
            base = float(value)
            setattr(model, name, base + h)
            up = mean_loss()
            setattr(model, name, base - h)
            dn = mean_loss()
            setattr(model, name, base)
            analytic = float(grads[name])
        else:
            idx = tuple(int(rng.integers(0, s)) for s in value.shape)
            base = value[idx]
            value[idx] = base + h
            up = mean_loss()
            value[idx] = base - h
            dn = mean_loss()
            value[idx] = base
            analytic = grads[name][idx]
        fd = (up - dn) / (2 * h)
        rel = abs(analytic - fd) / max(abs(analytic), abs(fd), 1e-10)
        worst = max(worst, rel)
    return worst


class TestModelGradients:
    def test_head_gradients(self):
        assert model_gradcheck(("u1", "c1", "u2", "c2"), 100, seed=8) < 1e-5

    def test_embedding_gradients(self):
        assert model_gradcheck(("w1", "b1", "w2", "b2"), 100, seed=9) < 1e-5


class TestToyEdgeModel:
    def test_parameter_count_default(self):
        model = ToyEdgeModel.init()
        # 3*64+64 + 64*16+16 + 4*16+16 + 16+1
        assert model.n_parameters == 1393

    def test_init_deterministic(self):
        a, b = ToyEdgeModel.init(seed=5), ToyEdgeModel.init(seed=5)
        for name in ToyEdgeModel.PARAM_NAMES:
            assert np.array_equal(np.asarray(getattr(a, name)), np.asarray(getattr(b, name)))

    def test_json_roundtrip(self):
        model = ToyEdgeModel.init(seed=3)
        clone = ToyEdgeModel.from_json(model.to_json())
        x = np.random.default_rng(0).uniform(size=(6, 3))
        pairs = all_pairs(6)
        assert np.array_equal(model.pair_logits(x, pairs), clone.pair_logits(x, pairs))
        assert json.loads(model.to_json())["heads"] == 4

    def test_logits_symmetric_in_pair_order(self):
        model = ToyEdgeModel.init(seed=1)
        x = np.random.default_rng(2).uniform(size=(8, 3))
        fwd = model.pair_logits(x, np.array([[2, 5]]))
        rev = model.pair_logits(x, np.array([[5, 2]]))
        assert fwd[0] == rev[0]

    def test_bad_dims(self):
        with pytest.raises(ValueError):
            ToyEdgeModel.init(dims=3)
        with pytest.raises(ValueError):
            ToyEdgeModel.init(heads=0)


class TestTrainToy:
    def test_single_triangle_overfits(self):
        mesh = normalize(triangle())
        model, curve = train_toy([mesh], epochs=500, seed=0)
        logits = ModelScorer(model, mesh.vertices).score_pairs(all_pairs(3))
        assert (logits > 0).all()  # recall 1.0 on the three edges
        assert curve[-1] < curve[0]

    def test_deterministic(self):
        mesh = normalize(wavy_patch(4, 4, 0.2, 1, 1))
        _, c1 = train_toy([mesh], epochs=50, seed=7)
        _, c2 = train_toy([mesh], epochs=50, seed=7)
        assert c1 == c2

    def test_descent(self):
        mesh = normalize(grid_patch(4, 4))
        _, curve = train_toy([mesh], epochs=200, seed=1)
        assert curve[-1] < curve[0]

    def test_empty_training_set(self):
        with pytest.raises(ValueError):
            train_toy([])

    def test_vertex_cap(self):
        big = Mesh(np.random.default_rng(0).uniform(size=(301, 3)) * 0.999)
        with pytest.raises(ValueError):
            train_toy([big])

    def test_unnormalized_rejected(self):
        with pytest.raises(OutOfRangeError):
            train_toy([triangle()])  # raw coordinates reach 1.0


class TestScorers:
    def test_oracle_reproduces_ground_truth(self, tetra):
        adj = adjacency_of(tetra)
        scorer = OracleScorer(adj)
        got = threshold(score_pairs(scorer, adj.n), adj.n)
        assert got == adj

    def test_empty_mask(self):
        scorer = OracleScorer(adjacency_of(triangle()))
        pairs, logits = score_pairs(scorer, 3, CandidateMask(3))
        assert len(pairs) == 0 and len(logits) == 0

    def test_mask_out_of_range(self):
        scorer = OracleScorer(adjacency_of(triangle()))
        mask = CandidateMask(5, np.array([[0, 4]]))
        with pytest.raises(ValueError):
            score_pairs(scorer, 3, mask)

    def test_knn_heuristic_on_grid(self):
        mesh = normalize(grid_patch(8, 8))
        truth = adjacency_of(mesh)
        scorer = KnnHeuristicScorer(mesh.vertices)
        pred = threshold(score_pairs(scorer, mesh.n_vertices), mesh.n_vertices)
        _, recall, _ = adjacency_f1_recall(pred, truth)
        assert recall >= 0.5

    def test_knn_symmetric(self):
        scorer = KnnHeuristicScorer(np.random.default_rng(1).uniform(size=(20, 3)))
        fwd = scorer.score_pairs(np.array([[3, 11]]))
        rev = scorer.score_pairs(np.array([[11, 3]]))
        assert fwd[0] == rev[0]

    def test_model_scorer_threshold_matches_training(self):
        mesh = normalize(grid_patch(5, 5))
        model, _ = train_toy([mesh], learning_rate=2.0, epochs=2000, seed=0)
        scorer = ModelScorer(model, mesh.vertices)
        pred = threshold(score_pairs(scorer, mesh.n_vertices), mesh.n_vertices)
        truth = adjacency_of(mesh)
        _, recall, precision = adjacency_f1_recall(pred, truth)
        assert recall == 1.0 and precision == 1.0
