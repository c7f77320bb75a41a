import numpy as np
import pytest

from protocol.aggregator import SecureAggregator
from protocol.exceptions import AggregationError, ProtocolError, TranscriptFormatError
from protocol.messages import Message, Variant, status_payload
from protocol.rounds import (
    RoundTranscript,
    broadcast_model,
    replay_round,
    run_aocs_round,
    run_full_round,
    run_ocs_round,
    run_uniform_round,
    submit_updates,
)
from protocol.streams import RoundStream
from sampling.core import aocs_probabilities, ocs_probabilities
from sampling.exceptions import InvalidBudgetError, InvalidNormsError
from sampling.vectors import ClientSelection, ProbabilityVector

WORKED_NORMS = [1.0, 2.0, 3.0, 10.0]
WORKED_PROBS = [1 / 6, 1 / 3, 1 / 2, 1.0]


class TestMessages:
    def test_status_payload(self):
        assert status_payload(0.25) == (1.0, 0.25)
        assert status_payload(1.0) == (0.0, 0.0)

    def test_line_format(self):
        msg = Message(3, "client:1", Variant.STATUS_REPORT, (1, 0.5))
        assert msg.to_line() == "3\tclient:1\tStatusReport\t[1.0, 0.5]\t*"
        assert Message.from_line(msg.to_line()) == msg

    @pytest.mark.parametrize(
        "line",
        [
            "3\tclient:1\tStatusReport\t[1.0]",
            "x\tclient:1\tStatusReport\t[1.0]\t*",
            "3\tclient:1\tUnknown\t[1.0]\t*",
            "3\tclient:1\tNormReport\t[\"a\"]\t*",
        ],
    )
    def test_malformed_lines(self, line):
        with pytest.raises(TranscriptFormatError):
            Message.from_line(line, 7)


class TestOcsRound:
    def test_worked_example(self):
        t = run_ocs_round(WORKED_NORMS, 2, RoundStream(0, 1))
        assert t.probabilities.tolist() == pytest.approx(WORKED_PROBS, abs=1e-12)
        reports = t.of_variant(Variant.NORM_REPORT)
        assert [msg.payload for msg in reports] == [(u,) for u in WORKED_NORMS]
        assert len(t.of_variant(Variant.PROBABILITY_BROADCAST)) == 4
        assert 3 in t.selection

    def test_budget_covers_everyone(self):
        t = run_ocs_round([1, 7, 2], 3, RoundStream(0, 1))
        assert list(t.selection) == [0, 1, 2]
        assert len(t.of_variant(Variant.NORM_REPORT)) == 3

    def test_all_zero_norms(self):
        t = run_ocs_round([0, 0, 0, 0], 2, RoundStream(0, 1))
        assert t.degenerate
        assert t.selection.size == 0
        assert submit_updates(t, [np.ones(2)] * 4, [0.25] * 4).tolist() == [0.0, 0.0]

    def test_validation_errors_propagate(self):
        with pytest.raises(InvalidBudgetError):
            run_ocs_round([1, 2], 0, RoundStream(0, 1))
        with pytest.raises(InvalidNormsError):
            run_ocs_round([], 1, RoundStream(0, 1))


class TestAocsRound:
    def test_worked_example(self):
        t = run_aocs_round(WORKED_NORMS, 2, 4, RoundStream(0, 1))
        assert t.iterations_used == 2
        np.testing.assert_allclose(
            t.probabilities.probs, ocs_probabilities(WORKED_NORMS, 2).probs, atol=1e-12
        )
        calibrations = [msg.payload[0] for msg in t.of_variant(Variant.CALIBRATION_BROADCAST)]
        assert calibrations == pytest.approx([4 / 3, 1.0])

    def test_equal_norms(self):
        t = run_aocs_round([5, 5, 5, 5], 2, 4, RoundStream(0, 1))
        assert t.iterations_used == 1
        assert len(t.of_variant(Variant.STATUS_REPORT)) == 4

    def test_zero_sum_guard(self):
        t = run_aocs_round([0, 0, 0, 4], 1, 4, RoundStream(0, 1))
        assert t.iterations_used == 1
        assert t.of_variant(Variant.CALIBRATION_BROADCAST) == []
        assert t.selection.included <= {3}

    def test_saturated_clients_keep_reporting(self):
        t = run_aocs_round(WORKED_NORMS, 2, 4, RoundStream(0, 1))
        last = [msg for msg in t.of_variant(Variant.STATUS_REPORT) if msg.sender == "client:3"]
        assert [msg.payload for msg in last] == [(0.0, 0.0), (0.0, 0.0)]

    def test_matches_core_on_random_instances(self):
        rng = np.random.default_rng(7)
        for k in range(40):
            n = int(rng.integers(2, 30))
            m = int(rng.integers(1, n + 1))
            j_max = int(rng.integers(1, 6))
            norms = np.exp(rng.uniform(-3, 3, size=n))
            expected, used = aocs_probabilities(norms, m, j_max)
            t = run_aocs_round(norms, m, j_max, RoundStream(1, k))
            assert t.iterations_used == used
            assert t.probabilities.tolist() == expected.tolist()

    def test_same_selection_as_ocs(self):
        rng = np.random.default_rng(8)
        for k in range(40):
            n = int(rng.integers(2, 20))
            m = int(rng.integers(1, n))
            norms = np.exp(rng.uniform(-3, 3, size=n))
            stream = RoundStream(2, k)
            ocs = run_ocs_round(norms, m, stream)
            aocs = run_aocs_round(norms, m, n, stream)
            if np.allclose(ocs.probabilities.probs, aocs.probabilities.probs, atol=1e-10, rtol=0):
                assert ocs.selection == aocs.selection


class TestOtherRounds:
    def test_full(self):
        t = run_full_round(5, RoundStream(0, 1))
        assert t.selection.size == 5
        assert t.messages == []

    def test_uniform_is_seeded(self):
        a = run_uniform_round(10, 3, RoundStream(4, 2))
        b = run_uniform_round(10, 3, RoundStream(4, 2))
        assert a.selection == b.selection
        assert a.probabilities.tolist() == [0.3] * 10


class TestSubmission:
    def test_weighted_sum(self):
        t = RoundTranscript("ocs", 1, 0, 2, 1)
        t.probabilities = ProbabilityVector([0.5, 0.5], 1)
        t.selection = ClientSelection(frozenset({1}), 2)
        G = submit_updates(t, [np.array([2.0, 0.0]), np.array([0.0, 4.0])], [0.5, 0.5])
        assert G.tolist() == [0.0, 4.0]
        (msg,) = t.of_variant(Variant.UPDATE_SUBMISSION)
        assert msg.sender == "client:1" and msg.payload == (0.0, 4.0)

    def test_incomplete_round(self):
        with pytest.raises(ProtocolError):
            submit_updates(RoundTranscript("ocs", 1, 0, 2, 1), [np.ones(1)] * 2, [0.5] * 2)

    def test_model_broadcast_leads(self):
        t = run_ocs_round(WORKED_NORMS, 2, RoundStream(0, 1))
        broadcast_model(t, np.array([1.0, -1.0]))
        assert t.messages[0].variant == Variant.MODEL_BROADCAST


class TestAggregator:
    def test_only_sums_leave(self):
        agg = SecureAggregator()
        agg.receive(Message(1, "client:0", Variant.STATUS_REPORT, (1.0, 0.25)))
        agg.receive(Message(1, "client:1", Variant.STATUS_REPORT, (0.0, 0.0)))
        assert agg.contributors == 2
        assert agg.total() == (1.0, 0.25)
        assert agg.contributors == 0

    def test_rejects_master_messages(self):
        with pytest.raises(AggregationError):
            SecureAggregator().receive(Message(1, "master", Variant.CALIBRATION_BROADCAST, (1.0,)))

    def test_rejects_mixed_sizes(self):
        agg = SecureAggregator()
        agg.receive(Message(1, "client:0", Variant.NORM_REPORT, (1.0,)))
        with pytest.raises(AggregationError):
            agg.receive(Message(1, "client:1", Variant.STATUS_REPORT, (1.0, 0.5)))


class TestTranscriptLog:
    @pytest.mark.parametrize("mode", ["ocs", "aocs"])
    def test_replay_is_byte_identical(self, mode):
        stream = RoundStream(9, 5)
        if mode == "ocs":
            original = run_ocs_round(WORKED_NORMS, 2, stream)
        else:
            original = run_aocs_round(WORKED_NORMS, 2, 4, stream)
        restored = RoundTranscript.from_lines(original.to_lines())
        assert restored.to_lines() == original.to_lines()
        assert replay_round(restored).to_lines() == original.to_lines()

    def test_replay_uniform(self):
        original = run_uniform_round(6, 2, RoundStream(3, 3))
        assert replay_round(RoundTranscript.from_lines(original.to_lines())).to_lines() == original.to_lines()

    def test_missing_header(self):
        with pytest.raises(TranscriptFormatError):
            RoundTranscript.from_lines(["1\tclient:0\tNormReport\t[1.0]\t*"])
