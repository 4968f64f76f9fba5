"""Tests for the simulation harness: runs, baselines, comparisons, estimators."""

import pytest

from semdiff.core import StepWeights
from semdiff.simulate import (
    BINARY_CONVENTIONS,
    CALIBRATED_CONVENTIONS,
    GridProblem,
    PolicyMode,
    UserPolicy,
    binary_search_steps,
    compare_vs_binary,
    estimate_contraction_probability,
    fuzzy_counts_vectorized,
    optimize_weights,
    ordered_weight_grid,
    simulate_run,
)

W_PAPERISH = StepWeights(0.25, 0.35, 0.45)
W_N9 = StepWeights(0.250, 0.361, 0.444)


class TestSimulateRun:
    def test_two_point_grid_terminates(self):
        trace = simulate_run(2, 1, W_PAPERISH)
        assert trace.terminated
        assert abs(trace.final_position - trace.target) < trace.epsilon
        assert trace.final_variant == trace.target

    def test_every_grid_target_is_found(self):
        for n in (5, 9, 17):
            for ti in range(n):
                trace = simulate_run(n, ti, W_PAPERISH)
                assert abs(trace.final_position - trace.target) < trace.epsilon
                assert trace.final_variant == pytest.approx(trace.target)

    def test_determinism_bit_identical(self):
        policy = UserPolicy(PolicyMode.ERRONEOUS, p_err=0.2, rng_seed=7)
        a = simulate_run(41, 3, W_PAPERISH, policy, algorithm="tolerant")
        b = simulate_run(41, 3, W_PAPERISH, policy, algorithm="tolerant")
        assert a == b

    def test_trace_width_algebra(self):
        trace = simulate_run(33, 5, W_PAPERISH)
        assert len(trace.widths) == trace.step_count + 1
        product = trace.widths[0]
        for g, w_prev, w_next in zip(trace.gammas, trace.widths, trace.widths[1:]):
            assert w_next == pytest.approx(g * w_prev, abs=1e-15)
            product *= g
        assert product == pytest.approx(trace.widths[-1], abs=1e-12)

    def test_pair_counts_cover_all_pairs(self):
        policy = UserPolicy(PolicyMode.ERRONEOUS, p_err=0.2, rng_seed=3)
        trace = simulate_run(41, 10, W_PAPERISH, policy, algorithm="tolerant")
        assert trace.contracting_count + trace.neutral_count == trace.step_count - 1

    def test_confirm_stop_on_exact_arrival(self):
        # slightly step 0.25 * 2 lands exactly on -0.5 (index 2 of 9)
        trace = simulate_run(9, 2, W_N9, stop="confirm")
        assert trace.confirmed and trace.step_count == 1
        assert trace.final_position == trace.target

    def test_confirm_stop_at_start(self):
        trace = simulate_run(9, 4, W_N9, stop="confirm")
        assert trace.confirmed and trace.step_count == 0

    def test_erroneous_with_simple_requires_opt_in(self):
        policy = UserPolicy(PolicyMode.ERRONEOUS, p_err=0.1, rng_seed=0)
        with pytest.raises(Exception):
            simulate_run(9, 0, W_PAPERISH, policy, algorithm="simple")
        trace = simulate_run(9, 0, W_PAPERISH, policy, algorithm="simple",
                             allow_errors_with_simple=True)
        assert trace.step_count > 0

    def test_invalid_target_rejected(self):
        with pytest.raises(Exception):
            simulate_run(9, 9, W_PAPERISH)


class TestBinaryConventions:
    def test_middle_probed_first(self):
        assert binary_search_steps(9, 4, "probe_equality_lower") == 1

    def test_leftmost_descent(self):
        # probes 4 -> 1 -> 0
        assert binary_search_steps(9, 0, "probe_equality_lower") == 3

    def test_probe_equality_full_column(self):
        col = [binary_search_steps(9, ti, "probe_equality_lower") for ti in range(9)]
        assert col == [3, 2, 3, 4, 1, 3, 2, 3, 4]

    def test_index_halving_column(self):
        col = [binary_search_steps(9, ti, "index_halving") for ti in range(9)]
        assert col == [4, 3, 3, 3, 4, 4, 3, 3, 3]

    def test_protocol_halving_column(self):
        col = [binary_search_steps(9, ti, "protocol_halving_confirm") for ti in range(9)]
        assert col == [1, 4, 2, 4, 0, 4, 2, 4, 1]

    def test_all_conventions_positive_and_bounded(self):
        for conv in BINARY_CONVENTIONS:
            for n in (2, 5, 9, 17):
                for ti in range(n):
                    steps = binary_search_steps(n, ti, conv)
                    assert 0 <= steps <= 4 * n

    def test_unknown_convention_rejected(self):
        with pytest.raises(Exception):
            binary_search_steps(9, 0, "bogus")


class TestCompare:
    def test_totals_sum_to_n(self):
        for n in (2, 5, 9):
            report = compare_vs_binary(n, W_PAPERISH)
            assert report.wins + report.draws + report.losses == n
            assert report.win_rate == report.wins / n

    def test_calibrated_headline_split(self):
        report = compare_vs_binary(9, W_N9, conventions=CALIBRATED_CONVENTIONS)
        assert (report.wins, report.draws, report.losses) == (4, 1, 4)
        assert [t.t_fuzzy for t in report.per_target] == [2, 5, 1, 2, 0, 2, 1, 5, 2]

    def test_erroneous_policy_rejected(self):
        with pytest.raises(Exception):
            compare_vs_binary(9, W_PAPERISH, UserPolicy(PolicyMode.ERRONEOUS, 0.1))


class TestVectorizedRuns:
    def test_matches_scalar_runs(self):
        grid = ordered_weight_grid(0.17)  # small grid, diverse triples
        assert len(grid) > 5
        for n in (7, 9):
            for ti in range(n):
                vec = fuzzy_counts_vectorized(n, ti, grid, stop="precision")
                for row, expected in zip(grid, vec):
                    w = StepWeights(*map(float, row))
                    assert simulate_run(n, ti, w).step_count == expected
                vec_c = fuzzy_counts_vectorized(n, ti, grid, stop="confirm")
                for row, expected in zip(grid, vec_c):
                    w = StepWeights(*map(float, row))
                    assert simulate_run(n, ti, w, stop="confirm").step_count == expected

    def test_resolution_floor(self):
        with pytest.raises(Exception):
            ordered_weight_grid(0.0005)


class TestOptimize:
    def test_small_grid_contains_feasible_optimum(self):
        weights, report = optimize_weights(5, resolution=0.1)
        assert 0 < weights.slightly < weights.moderately < weights.significantly < 1
        assert report.wins + report.draws + report.losses == 5

    def test_optimum_dominates_published_point_at_n9(self):
        _, report = optimize_weights(9, resolution=0.05, conventions=CALIBRATED_CONVENTIONS)
        published = compare_vs_binary(9, W_N9, conventions=CALIBRATED_CONVENTIONS)
        assert report.wins >= published.wins


class TestContractionEstimate:
    def test_no_errors_makes_estimates_coincide(self):
        policy = UserPolicy(PolicyMode.ERRONEOUS, p_err=0.0, rng_seed=11)
        est = estimate_contraction_probability(21, W_PAPERISH, policy, trials=1000)
        assert est.p_c_hat == pytest.approx(est.pi_c_hat)
        assert est.realized_err_rate == 0.0
        assert 0 <= est.p_c_hat <= 1

    def test_reports_discrepancy_and_errors(self):
        policy = UserPolicy(PolicyMode.ERRONEOUS, p_err=0.2, rng_seed=11)
        est = estimate_contraction_probability(41, W_PAPERISH, policy, trials=1500)
        assert 0 < est.realized_err_rate < 0.2  # discipline suppresses some injections
        assert est.discrepancy == pytest.approx(
            abs(est.p_c_hat - est.pi_c_hat * (1 - 0.2)), abs=1e-12
        )
        # the identity holds only approximately under the structured generator
        assert est.discrepancy < 0.06
        assert est.p_c_hat < 1.0

    def test_contraction_probability_decreases_with_errors(self):
        base = estimate_contraction_probability(
            41, W_PAPERISH, UserPolicy(PolicyMode.ERRONEOUS, 0.0, rng_seed=2), trials=1000
        )
        noisy = estimate_contraction_probability(
            41, W_PAPERISH, UserPolicy(PolicyMode.ERRONEOUS, 0.3, rng_seed=2), trials=1000
        )
        assert noisy.p_c_hat < base.p_c_hat

    def test_trial_floor_enforced(self):
        with pytest.raises(Exception):
            estimate_contraction_probability(
                9, W_PAPERISH, UserPolicy(PolicyMode.ERRONEOUS, 0.1), trials=10
            )


def test_grid_problem_geometry():
    p = GridProblem(41, 28)
    assert p.spacing == pytest.approx(0.05)
    assert p.epsilon == pytest.approx(0.025)
    assert p.target == pytest.approx(0.4)
    assert p.nearest_index(0.41) == 28
