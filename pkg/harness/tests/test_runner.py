import io
import math

import numpy as np
import pytest

from harness.analysis import (
    mean_final_suboptimality,
    paired_one_sided_test,
    sweep_budget,
    tune_step_size,
)
from harness.forms import ExperimentConfig
from harness.referentiels import CSV_COLUMNS
from harness.runner import MetricsRow, bits_to_target, format_float, run_experiment, run_seed


def make_config(**overrides):
    values = {
        "algorithm": "dsgd",
        "sampler": "ocs",
        "n": 6,
        "m": 2,
        "d": 3,
        "K": 15,
        "eta": 0.05,
        "heterogeneity": 1.0,
        "seeds": "0-2",
    }
    values.update(overrides)
    return ExperimentConfig.from_mapping(values)


def _csv(config, **kwargs):
    buffer = io.StringIO()
    run_experiment(config, buffer, **kwargs)
    return buffer.getvalue()


class TestRunSeed:
    def test_one_row_per_round(self):
        result = run_seed(make_config(), 0)
        assert [row.round for row in result.rows] == list(range(1, 16))
        assert not result.diverged

    def test_bits_are_non_decreasing(self):
        result = run_seed(make_config(sampler="aocs"), 1)
        bits = [row.cumulative_uplink_bits for row in result.rows]
        assert all(b >= a for a, b in zip(bits, bits[1:]))
        assert bits[-1] == result.total_bits > 0

    def test_full_participation_columns(self):
        result = run_seed(make_config(sampler="full", m=6), 0)
        assert all(row.sampled_count == 6 for row in result.rows)
        assert all(row.alpha is None and row.gamma is None for row in result.rows)
        assert result.rows[-1].suboptimality < result.rows[0].suboptimality

    def test_aocs_with_enough_iterations_matches_ocs(self):
        ocs = run_seed(make_config(sampler="ocs"), 2)
        aocs = run_seed(make_config(sampler="aocs", j_max=6), 2)
        for a, b in zip(ocs.rows, aocs.rows):
            assert a.suboptimality == pytest.approx(b.suboptimality, abs=1e-10)
            assert a.sampled_count == b.sampled_count

    def test_divergence_is_recorded(self):
        result = run_seed(make_config(eta=50.0, sampler="full", m=6), 0, divergence_threshold=1e8)
        assert result.diverged
        assert result.divergence_round == len(result.rows) + 1
        assert math.isinf(result.final_suboptimality)

    def test_fedavg_runs(self):
        config = make_config(algorithm="fedavg", eta=None, eta_l=0.02, R=3, sigma2=0.1)
        result = run_seed(config, 0)
        assert len(result.rows) == 15

    def test_logistic_task_with_minibatches(self):
        config = make_config(task="logistic", samples_per_client=12, batch_size=4, eta=0.5)
        result = run_seed(config, 0)
        assert len(result.rows) == 15
        assert all(np.isfinite(row.suboptimality) for row in result.rows)


class TestCsv:
    def test_header_and_float_format(self):
        lines = _csv(make_config(seeds="0")).splitlines()
        assert lines[0] == ",".join(CSV_COLUMNS)
        assert len(lines) == 16
        fields = lines[1].split(",")
        assert fields[0] == "0" and fields[1] == "1"
        assert float(fields[2]) == pytest.approx(float(format_float(float(fields[2]))))

    def test_full_sampler_leaves_factor_columns_empty(self):
        lines = _csv(make_config(sampler="full", m=6, seeds="0")).splitlines()
        fields = lines[1].split(",")
        assert fields[5] == "" and fields[6] == ""
        assert fields[4] == "6"

    def test_repeated_runs_are_byte_identical(self):
        config = make_config(sampler="aocs", sigma2=0.5)
        assert _csv(config) == _csv(config)

    def test_parallel_output_matches_sequential(self):
        config = make_config(sigma2=0.5, seeds="0-3")
        assert _csv(config, parallel=2) == _csv(config)

    def test_rows_are_in_seed_order(self):
        lines = _csv(make_config(seeds="3,1")).splitlines()[1:]
        seeds = [line.split(",")[0] for line in lines]
        assert seeds == ["3"] * 15 + ["1"] * 15

    def test_format_float(self):
        assert format_float(None) == ""
        assert format_float(0.1) == "0.10000000000000001"


class TestAnalysis:
    def test_bits_to_target(self):
        rows = [
            MetricsRow(0, k, sub, 0.0, 1, None, None, 100 * k)
            for k, sub in enumerate([1.0, 0.5, 0.05, 0.2, 0.001], start=1)
        ]
        assert bits_to_target(rows, 0.1) == 300
        assert bits_to_target(rows, 1e-6) is None

    def test_paired_test_direction(self):
        a = [1.0, 2.0, 3.0, 4.0, 5.0]
        b = [1.5, 2.6, 3.4, 4.7, 5.5]
        assert paired_one_sided_test(a, b) < 0.01
        assert paired_one_sided_test(b, a) > 0.99
        assert paired_one_sided_test(a, a) == 1.0
        with pytest.raises(ValueError):
            paired_one_sided_test([1.0], [2.0])

    def test_mean_final_suboptimality_with_divergence(self):
        results = run_experiment(make_config(eta=50.0, sampler="full", m=6, seeds="0"), divergence_threshold=1e8)
        assert math.isinf(mean_final_suboptimality(results))

    def test_tune_extends_grid_at_boundary(self):
        config = make_config(sampler="full", m=6, seeds="0", K=10)
        result = tune_step_size(config, [2.0**-6, 2.0**-7], divergence_threshold=1e8)
        # le plus grand pas de la grille est le meilleur : la grille s'étend vers le haut
        assert result.extensions >= 1
        assert max(result.scores) > 2.0**-6
        assert result.best_step in result.scores

    def test_tune_rejects_empty_grid(self):
        with pytest.raises(ValueError):
            tune_step_size(make_config(), [])

    def test_sweep_budget(self):
        points = sweep_budget(make_config(seeds="0-1"), [1, 3, 6])
        assert [p.m for p in points] == [1, 3, 6]
        assert points[0].mean_uplink_bits < points[-1].mean_uplink_bits
        with pytest.raises(ValueError):
            sweep_budget(make_config(), [7])
