import math

import numpy as np
import pytest

from optim.drivers import ModelState, dsgd_round, fedavg_round
from optim.exceptions import DivergenceError, OptimError
from optim.oracles import GradientOracleContract, noisy_gradient
from optim.theory import Theorem, dsgd_cvx_rhs, step_size_caps, theorem_constants
from protocol.ledger import BitLedger
from protocol.messages import Variant
from protocol.rounds import RoundTranscript, submit_updates
from protocol.streams import RoundStream
from sampling.vectors import ClientSelection, ProbabilityVector
from tasks.clients import QuadraticClientTask
from tasks.federation import quadratic_federation
from tasks.generators import make_quadratic_federation


@pytest.fixture
def federation():
    return make_quadratic_federation(8, 3, heterogeneity=1.0, seed=11)


def _run(driver, fed, rounds, seed=0, **kwargs):
    state = ModelState(np.zeros(fed.d))
    history = []
    for k in range(1, rounds + 1):
        state, transcript, metrics = driver(state, fed, stream=RoundStream(seed, k), **kwargs)
        history.append((state, transcript, metrics))
    return history


# =========================
# DSGD
# =========================
class TestDsgd:
    def test_hand_computed_master_update(self):
        transcript = RoundTranscript("uniform", 1, 0, 2, 1)
        transcript.probabilities = ProbabilityVector([0.5, 0.5], 1)
        transcript.selection = ClientSelection(frozenset({1}), 2)
        G = submit_updates(transcript, [np.array([2.0, 0.0]), np.array([0.0, 4.0])], [0.5, 0.5])
        assert G.tolist() == [0.0, 4.0]
        x = np.array([1.0, 1.0]) - 0.1 * G
        assert x.tolist() == pytest.approx([1.0, 0.6])

    def test_update_matches_estimator(self, federation):
        state = ModelState(np.ones(federation.d))
        stream = RoundStream(3, 1)
        new, transcript, metrics = dsgd_round(state, federation, "ocs", 3, 0.05, stream)
        grads = federation.client_grads(state.x)
        probs = transcript.probabilities.probs
        expected = np.zeros(federation.d)
        for i in transcript.selection:
            expected += federation.weights[i] / probs[i] * grads[i]
        np.testing.assert_allclose(new.x, state.x - 0.05 * expected, rtol=1e-12, atol=1e-14)
        assert new.round == 1
        assert metrics.sampled_count == transcript.selection.size
        assert 0.0 <= metrics.alpha <= 1.0
        assert 3 / 8 <= metrics.gamma <= 1.0

    def test_full_participation_is_gradient_step(self, federation):
        state = ModelState(np.ones(federation.d))
        new, _, metrics = dsgd_round(state, federation, "full", 8, 0.05, RoundStream(0, 1))
        np.testing.assert_allclose(new.x, state.x - 0.05 * federation.grad(state.x), rtol=1e-12)
        assert metrics.sampled_count == 8
        assert metrics.alpha is None and metrics.gamma is None

    def test_empty_selection_keeps_model(self):
        # gradients nuls en x* : normes nulles, aucun client tiré
        fed = quadratic_federation([[[1.0]], [[1.0]]], [[0.0], [0.0]], [0.5, 0.5])
        state = ModelState([0.0])
        new, transcript, _ = dsgd_round(state, fed, "ocs", 1, 0.1, RoundStream(0, 1))
        assert transcript.selection.size == 0
        assert transcript.degenerate
        assert new.x.tolist() == [0.0]

    def test_monotone_convergence_full_exact(self, federation):
        constants = theorem_constants(federation, GradientOracleContract())
        eta = 0.5 * step_size_caps(Theorem.DSGD_CVX, constants, 1.0).eta_cap
        history = _run(dsgd_round, federation, 200, sampler_kind="full", m=8, eta=eta)
        dists = [float(np.linalg.norm(state.x - federation.x_star)) for state, _, _ in history]
        initial = float(np.linalg.norm(federation.x_star))
        assert dists[0] < initial
        assert all(b < a for a, b in zip(dists, dists[1:]))

    def test_ledger_is_charged(self, federation):
        ledger = BitLedger(float_width=32)
        _run(dsgd_round, federation, 5, sampler_kind="aocs", m=2, eta=0.05, ledger=ledger)
        assert len(ledger.per_round) == 5
        assert ledger.uplink_bits > 0
        assert ledger.overhead_bits > 0

    def test_invalid_arguments(self, federation):
        state = ModelState(np.zeros(federation.d))
        with pytest.raises(OptimError):
            dsgd_round(state, federation, "ocs", 2, 0.0, RoundStream(0, 1))
        with pytest.raises(OptimError):
            dsgd_round(state, federation, "greedy", 2, 0.1, RoundStream(0, 1))

    def test_divergence_raises(self, federation):
        state = ModelState(np.ones(federation.d))
        with pytest.raises(DivergenceError) as excinfo:
            for k in range(1, 200):
                state, _, _ = dsgd_round(
                    state, federation, "full", 8, 10.0, RoundStream(0, k), divergence_threshold=1e6
                )
        assert excinfo.value.round_index >= 1


# =========================
# FedAvg
# =========================
class TestFedAvg:
    def test_hand_traced_local_steps(self):
        fed = quadratic_federation([[[1.0]]], [[0.0]], [1.0])
        new, _, _ = fedavg_round(ModelState([1.0]), fed, "full", 1, 2, 0.1, 1.0, RoundStream(0, 1))
        assert new.x.tolist() == pytest.approx([0.81])

    def test_submission_carries_sum_of_local_gradients(self):
        fed = quadratic_federation([[[1.0]]], [[0.0]], [1.0])
        eta_l = 0.1
        _, transcript, _ = fedavg_round(ModelState([1.0]), fed, "full", 1, 2, eta_l, 1.0, RoundStream(0, 1))
        (submission,) = transcript.of_variant(Variant.UPDATE_SUBMISSION)
        # S = g(1) + g(0.9) = 1.9 ; Δy = η_l·S = 0.19
        assert list(submission.payload) == pytest.approx([1.9])
        assert eta_l * submission.payload[0] == pytest.approx(0.19)

    @pytest.mark.parametrize("sampler", ["full", "uniform", "ocs", "aocs"])
    def test_single_local_step_matches_dsgd(self, federation, sampler):
        contract = GradientOracleContract(M=0.5, sigma2=1.0)
        dsgd = _run(dsgd_round, federation, 15, seed=4, sampler_kind=sampler, m=3, eta=0.05, contract=contract)
        fedavg = _run(
            fedavg_round,
            federation,
            15,
            seed=4,
            sampler_kind=sampler,
            m=3,
            R=1,
            eta_l=0.05,
            eta_g=1.0,
            contract=contract,
        )
        for (a, ta, _), (b, tb, _) in zip(dsgd, fedavg):
            assert np.array_equal(a.x, b.x)
            assert ta.selection == tb.selection

    def test_rejects_bad_local_steps(self, federation):
        with pytest.raises(OptimError):
            fedavg_round(ModelState(np.zeros(3)), federation, "ocs", 2, 0, 0.1, 1.0, RoundStream(0, 1))


# =========================
# Bruit et estimateur
# =========================
class TestNoiseAndEstimator:
    def test_exact_contract_returns_gradient(self):
        task = QuadraticClientTask(np.eye(2), [1.0, -1.0])
        g = noisy_gradient(task, np.zeros(2), GradientOracleContract(), np.random.default_rng(0))
        assert g.tolist() == [-1.0, 1.0]

    @pytest.mark.parametrize(
        "contract,x,expected",
        [
            (GradientOracleContract(M=0.0, sigma2=4.0), np.zeros(5), 4.0),
            (GradientOracleContract(M=1.0, sigma2=0.0), np.array([3.0, 0, 0, 0, 0]), 9.0),
        ],
    )
    def test_noise_second_moment(self, contract, x, expected):
        task = QuadraticClientTask(np.eye(5), np.zeros(5))
        rng = np.random.default_rng(1)
        draws = 100_000
        sq = np.array([np.sum((noisy_gradient(task, x, contract, rng) - x) ** 2) for _ in range(draws)])
        # ‖ξ‖² = (s²/d)·χ²_d, écart-type s²·√(2/d)
        sd = expected * math.sqrt(2 / 5) / math.sqrt(draws)
        assert abs(sq.mean() - expected) <= 3 * sd

    @pytest.mark.slow
    @pytest.mark.parametrize("sampler", ["uniform", "ocs", "aocs"])
    def test_master_update_is_unbiased(self, sampler):
        fed = make_quadratic_federation(
            10, 2, heterogeneity=2.0, weight_scheme="proportional-lognormal", seed=5
        )
        # x = 0 et η = 1 : le nouveau modèle vaut exactement −G
        state = ModelState(np.zeros(fed.d))
        draws = 100_000
        samples = np.array(
            [-dsgd_round(state, fed, sampler, 3, 1.0, RoundStream(draw, 1))[0].x for draw in range(draws)]
        )
        target = fed.grad(state.x)
        sd = samples.std(axis=0) / math.sqrt(draws)
        assert np.all(np.abs(samples.mean(axis=0) - target) <= 3 * sd + 1e-12)


@pytest.mark.slow
def test_strongly_convex_recursion_holds_on_average():
    n, d, m = 16, 10, 4
    fed = make_quadratic_federation(n, d, heterogeneity=1.0, seed=0)
    contract = GradientOracleContract(M=0.0, sigma2=1.0)
    constants = theorem_constants(fed, contract)
    # γ^k ≥ m/n : le pas reste admissible à chaque round
    eta = 0.5 * step_size_caps(Theorem.DSGD_CVX, constants, m / n).eta_cap
    seeds, rounds = 200, 100
    lhs = np.zeros((seeds, rounds))
    rhs = np.zeros((seeds, rounds))
    for seed in range(seeds):
        state = ModelState(np.zeros(d))
        for k in range(rounds):
            before = float(np.sum((state.x - fed.x_star) ** 2))
            state, _, metrics = dsgd_round(
                state, fed, "ocs", m, eta, RoundStream(seed, k + 1), contract=contract
            )
            lhs[seed, k] = float(np.sum((state.x - fed.x_star) ** 2))
            rhs[seed, k] = dsgd_cvx_rhs(constants, eta, metrics.gamma, before)
    holds = lhs.mean(axis=0) <= rhs.mean(axis=0)
    assert holds.mean() >= 0.99
