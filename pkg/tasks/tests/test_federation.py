import numpy as np
import pytest

from tasks.clients import LogisticClientTask, QuadraticClientTask
from tasks.exceptions import FederationFormatError, TaskError
from tasks.federation import exact_metrics, quadratic_federation
from tasks.generators import (
    make_logistic_federation,
    make_quadratic_federation,
    unbalance_counts,
)
from tasks.serialization import dump_federation, load_federation


@pytest.fixture
def two_point_federation():
    return quadratic_federation([[[1.0]], [[1.0]]], [[0.0], [2.0]], [0.5, 0.5])


def _central_difference(fn, x, h=1e-6):
    grad = np.zeros_like(x)
    for j in range(x.size):
        e = np.zeros_like(x)
        e[j] = h
        grad[j] = (fn(x + e) - fn(x - e)) / (2 * h)
    return grad


# =========================
# Quadratiques
# =========================
class TestQuadratic:
    def test_two_point_constants(self, two_point_federation):
        fed = two_point_federation
        assert fed.x_star.tolist() == pytest.approx([1.0])
        assert fed.f_star == pytest.approx(0.5)
        assert fed.Z.tolist() == pytest.approx([0.5, 0.5])
        assert fed.W == 0.5
        assert fed.L == 1.0 and fed.mu == 1.0

    def test_two_point_metrics(self, two_point_federation):
        metrics = exact_metrics(two_point_federation, np.array([0.0]))
        assert metrics.suboptimality == pytest.approx(0.5)
        assert metrics.dist_sq == pytest.approx(1.0)
        assert metrics.client_grads.ravel().tolist() == [0.0, -2.0]
        assert metrics.dispersion == pytest.approx(1.0)

    def test_metrics_vanish_at_optimum(self):
        fed = make_quadratic_federation(6, 3, heterogeneity=1.0, seed=2)
        metrics = exact_metrics(fed, fed.x_star)
        assert metrics.suboptimality == 0.0
        assert metrics.dist_sq == 0.0
        assert np.linalg.norm(fed.grad(fed.x_star)) < 1e-10

    def test_homogeneous_federation(self):
        fed = make_quadratic_federation(5, 4, heterogeneity=0.0, seed=1)
        assert fed.Z.tolist() == [0.0] * 5
        assert np.array_equal(fed.x_star, fed.clients[0].b)
        assert fed.dispersion(fed.x_star) == pytest.approx(0.0, abs=1e-20)

    def test_identical_matrices_have_no_dispersion(self):
        A = np.diag([1.0, 3.0])
        fed = quadratic_federation([A, A, A], [[1.0, 1.0]] * 3, [0.2, 0.3, 0.5])
        rng = np.random.default_rng(0)
        for _ in range(10):
            assert fed.dispersion(rng.normal(size=2)) == pytest.approx(0.0, abs=1e-20)

    def test_constants_match_eigensolve(self):
        fed = make_quadratic_federation(8, 5, heterogeneity=2.0, weight_scheme="proportional-lognormal", seed=3)
        H = sum(w * c.A for w, c in zip(fed.weights, fed.clients))
        assert fed.mu == pytest.approx(np.linalg.eigvalsh(H).min(), rel=1e-8)
        assert fed.L == pytest.approx(max(np.linalg.eigvalsh(c.A).max() for c in fed.clients), rel=1e-8)
        assert 0.1 - 1e-8 <= fed.mu and fed.L <= 10.0 + 1e-8

    def test_lognormal_weights(self):
        fed = make_quadratic_federation(10, 2, weight_scheme="proportional-lognormal", seed=4)
        assert abs(fed.weights.sum() - 1.0) <= 1e-12
        assert fed.W > 1 / 10

    def test_seed_determinism(self):
        a = make_quadratic_federation(4, 3, heterogeneity=1.0, seed=9)
        b = make_quadratic_federation(4, 3, heterogeneity=1.0, seed=9)
        assert np.array_equal(a.x_star, b.x_star)
        assert a.f_star == b.f_star

    def test_optimality_on_random_points(self):
        fed = make_quadratic_federation(6, 3, heterogeneity=1.5, seed=5)
        rng = np.random.default_rng(1)
        values = [fed.f(x) for x in rng.normal(scale=3.0, size=(10_000, 3))]
        assert min(values) >= fed.f_star

    def test_gradients_match_finite_differences(self):
        fed = make_quadratic_federation(3, 4, heterogeneity=1.0, seed=6)
        rng = np.random.default_rng(2)
        for x in rng.normal(size=(100, 4)):
            for client in fed.clients:
                numeric = _central_difference(client.value, x)
                np.testing.assert_allclose(client.gradient(x), numeric, rtol=1e-6, atol=1e-7)

    @pytest.mark.parametrize(
        "kwargs",
        [
            {"n": 0, "d": 2},
            {"n": 2, "d": 2, "heterogeneity": -1.0},
            {"n": 2, "d": 2, "weight_scheme": "zipf"},
        ],
    )
    def test_invalid_parameters(self, kwargs):
        with pytest.raises(TaskError):
            make_quadratic_federation(**kwargs)

    def test_rejects_indefinite_matrix(self):
        with pytest.raises(TaskError):
            QuadraticClientTask([[1.0, 0.0], [0.0, -1.0]], [0.0, 0.0])

    def test_rejects_bad_weights(self):
        with pytest.raises(TaskError):
            quadratic_federation([[[1.0]], [[1.0]]], [[0.0], [1.0]], [0.5, 0.6])


# =========================
# Logistique
# =========================
class TestLogistic:
    def test_equal_counts_give_uniform_weights(self):
        fed = make_logistic_federation(4, 3, [20] * 4, seed=0)
        assert fed.weights.tolist() == [0.25] * 4

    def test_proportional_weights(self):
        fed = make_logistic_federation(3, 2, [90, 5, 5], seed=1)
        assert fed.weights.tolist() == pytest.approx([0.9, 0.05, 0.05])
        assert fed.W == pytest.approx(0.9)

    def test_reference_solution(self):
        fed = make_logistic_federation(3, 3, [30, 20, 10], seed=2, lam=0.1)
        assert np.linalg.norm(fed.grad(fed.x_star)) < 1e-10
        assert fed.mu == 0.1
        assert np.all(fed.Z >= 0)
        rng = np.random.default_rng(3)
        for x in fed.x_star + rng.normal(scale=0.5, size=(2_000, 3)):
            assert fed.f(x) >= fed.f_star

    def test_gradients_match_finite_differences(self):
        task = make_logistic_federation(2, 3, [15, 15], seed=3).clients[0]
        rng = np.random.default_rng(4)
        for x in rng.normal(size=(100, 3)):
            numeric = _central_difference(task.value, x)
            np.testing.assert_allclose(task.gradient(x), numeric, rtol=1e-6, atol=1e-8)

    def test_smoothness_bound(self):
        task = LogisticClientTask([[1.0, 0.0], [0.0, 2.0]], [1.0, -1.0], lam=0.5)
        assert task.smoothness == pytest.approx(4.0 / 8 + 0.5)
        eigs = np.linalg.eigvalsh(task.hessian(np.zeros(2)))
        assert eigs.max() <= task.smoothness + 1e-12

    def test_rejects_bad_counts(self):
        with pytest.raises(TaskError):
            make_logistic_federation(2, 2, [10, 0])
        with pytest.raises(TaskError):
            make_logistic_federation(3, 2, [10, 10])

    def test_rejects_bad_labels(self):
        with pytest.raises(TaskError):
            LogisticClientTask([[1.0]], [0.0])


class TestUnbalance:
    def test_outside_band_unchanged(self):
        rng = np.random.default_rng(0)
        assert unbalance_counts([5, 100, 10, 40], 0.5, 10, 40, rng) == [5, 100, 10, 40]

    def test_band_clients_dropped_or_truncated(self):
        rng = np.random.default_rng(1)
        result = unbalance_counts([20] * 1000, 0.3, 10, 40, rng)
        assert set(result) == {10}
        assert len(result) == pytest.approx(700, abs=60)

    def test_invalid_parameters(self):
        with pytest.raises(TaskError):
            unbalance_counts([5], 1.5, 1, 2, np.random.default_rng(0))


class TestSerialization:
    def test_quadratic_round_trip(self):
        fed = make_quadratic_federation(4, 3, heterogeneity=1.0, seed=7)
        loaded = load_federation(dump_federation(fed))
        assert loaded.params == fed.params
        np.testing.assert_array_equal(loaded.weights, fed.weights)
        np.testing.assert_allclose(loaded.x_star, fed.x_star, rtol=1e-12)

    def test_logistic_round_trip(self):
        fed = make_logistic_federation(2, 2, [10, 12], seed=8)
        loaded = load_federation(dump_federation(fed))
        assert loaded.kind == "logistic"
        np.testing.assert_allclose(loaded.x_star, fed.x_star, atol=1e-9)

    @pytest.mark.parametrize("text", ["{", "version: 1\nkind: cubic\nweights: [1.0]\nclients: []\n", "[]"])
    def test_rejects_bad_documents(self, text):
        with pytest.raises(FederationFormatError):
            load_federation(text)
