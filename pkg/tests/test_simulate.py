import math

import numpy as np
import pytest
import scipy.stats

import brute_force
from gwreduced import (
    AcceptanceBudgetExhausted,
    NodeBudgetExceededError,
    make_builtin,
)
from gwreduced.reduced import (
    bounded_survival_prob,
    conditional_reduced_pmf,
    mrca_distance_cdf,
    reduced_pmf,
)
from gwreduced.series import extinction_prob
from gwreduced.simulate import (
    GenealogyRecord,
    default_chunk_size,
    mrca_distance,
    reduced_counts,
    run_conditioned_batch,
    simulate_tree,
    write_batch_csv,
    write_batch_json,
)

LF = make_builtin("linear_fractional")
TERNARY = make_builtin("ternary_uniform")
TPMF = brute_force.TERNARY


def _record_from_counts(counts):
    sizes = [1]
    for draws in counts:
        sizes.append(int(np.sum(draws)))
    return GenealogyRecord(
        offspring_counts=tuple(np.asarray(c, dtype=np.int64) for c in counts),
        sizes=np.asarray(sizes, dtype=np.int64),
    )


class TestSimulateTree:
    def test_shape_and_invariants(self):
        rng = np.random.default_rng(3)
        for _ in range(200):
            record = simulate_tree(TERNARY, 6, rng)
            assert record.sizes[0] == 1
            assert record.horizon == 6
            for g, draws in enumerate(record.offspring_counts):
                assert record.sizes[g + 1] == draws.sum()
                assert len(draws) == record.sizes[g]
            died = np.nonzero(record.sizes == 0)[0]
            if died.size:
                assert np.all(record.sizes[died.min():] == 0)

    def test_one_generation_extinction_rate(self):
        rng = np.random.default_rng(5)
        extinct = sum(
            simulate_tree(TERNARY, 1, rng).sizes[1] == 0 for _ in range(20_000)
        )
        se = math.sqrt(0.25 * 0.75 / 20_000)
        assert abs(extinct / 20_000 - 0.25) < 4 * se

    def test_size_cap_flags_oversize(self):
        rng = np.random.default_rng(11)
        saw_oversize = False
        for _ in range(500):
            record = simulate_tree(LF, 30, rng, size_cap=3)
            if record.oversize:
                saw_oversize = True
                assert record.sizes[-1] > 3
                assert record.horizon <= 30
        assert saw_oversize

    def test_node_budget(self):
        rng = np.random.default_rng(13)
        with pytest.raises(NodeBudgetExceededError):
            for _ in range(2000):
                simulate_tree(LF, 50, rng, node_budget=20)


class TestReducedCounts:
    def test_terminal_equals_population(self):
        rng = np.random.default_rng(17)
        for _ in range(100):
            record = simulate_tree(TERNARY, 5, rng)
            got = reduced_counts(record, [5])
            assert got[0] == record.sizes[5]

    def test_root_is_one_on_survival(self):
        rng = np.random.default_rng(19)
        for _ in range(200):
            record = simulate_tree(TERNARY, 4, rng)
            got = reduced_counts(record, [0])
            assert got[0] == (1 if record.sizes[4] > 0 else 0)

    def test_hand_built_tree(self):
        # root -> 2 children; first child -> 1 grandchild, second -> none
        record = _record_from_counts([[2], [1, 0]])
        assert list(reduced_counts(record, [0, 1, 2])) == [1, 1, 1]
        # root -> 2, both children keep a line alive
        record = _record_from_counts([[2], [1, 2]])
        assert list(reduced_counts(record, [0, 1, 2])) == [1, 2, 3]

    def test_monotone_profile(self):
        rng = np.random.default_rng(23)
        for _ in range(300):
            record = simulate_tree(TERNARY, 7, rng)
            profile = reduced_counts(record, np.arange(8))
            assert np.all(np.diff(profile) >= 0)

    def test_query_validation(self):
        record = _record_from_counts([[1], [1]])
        with pytest.raises(ValueError):
            reduced_counts(record, [3])


class TestMrcaDistance:
    def test_extinct_tree_has_none(self):
        record = _record_from_counts([[0], []])
        assert mrca_distance(record) is None

    def test_single_line_tree(self):
        record = _record_from_counts([[1], [1], [1]])
        assert mrca_distance(record) == 1

    def test_split_at_root(self):
        # both root children hold lines to the end: ancestor is the root
        record = _record_from_counts([[2], [1, 1], [1, 1]])
        assert mrca_distance(record) == 3

    def test_late_split(self):
        # one line down to generation 1, whose individual spawns two
        # surviving lines: the ancestor sits two levels above the end
        record = _record_from_counts([[1], [2], [1, 1]])
        assert mrca_distance(record) == 2


class TestConditionedBatch:
    def test_replay_is_identical(self):
        a = run_conditioned_batch(TERNARY, 8, 3, [2, 4], 200, seed=42)
        b = run_conditioned_batch(TERNARY, 8, 3, [2, 4], 200, seed=42)
        assert a.replicates == b.replicates
        assert np.array_equal(a.reduced_counts, b.reduced_counts)
        assert np.array_equal(a.mrca_distances, b.mrca_distances)
        assert np.array_equal(a.replicate_ids, b.replicate_ids)
        assert a.stream_ids == b.stream_ids

    def test_worker_count_does_not_change_output(self):
        a = run_conditioned_batch(TERNARY, 6, 2, [3], 500, seed=7, workers=1)
        b = run_conditioned_batch(TERNARY, 6, 2, [3], 500, seed=7, workers=2)
        assert a.replicates == b.replicates
        assert np.array_equal(a.reduced_counts, b.reduced_counts)
        assert np.array_equal(a.replicate_ids, b.replicate_ids)

    def test_acceptance_event(self):
        batch = run_conditioned_batch(TERNARY, 8, 3, [8], 300, seed=1)
        assert batch.accepted >= 300
        assert np.all(batch.terminal_sizes >= 1)
        assert np.all(batch.terminal_sizes <= 3)
        assert np.array_equal(batch.reduced_counts[:, 0], batch.terminal_sizes)
        assert np.all(batch.mrca_distances >= 1)
        assert np.all(batch.mrca_distances <= 8)

    def test_acceptance_rate_tracks_event_probability(self):
        n, C = 64, 2
        batch = run_conditioned_batch(TERNARY, n, C, [], 400, seed=3)
        want = bounded_survival_prob(TERNARY, n, C)
        se = math.sqrt(want * (1 - want) / batch.replicates)
        assert abs(batch.acceptance_rate - want) < 3 * se

    def test_survival_rate_with_vacuous_bound(self):
        n = 10
        batch = run_conditioned_batch(LF, n, 10_000, [], 2000, seed=9)
        want = 1.0 - extinction_prob(LF, n)
        se = math.sqrt(want * (1 - want) / batch.replicates)
        assert abs(batch.acceptance_rate - want) < 3 * se

    def test_critical_mean_of_terminal_sizes(self):
        # E[Z(n)] = 1 over all replicates, extinct ones contributing 0
        n = 50
        batch = run_conditioned_batch(TERNARY, n, 100_000, [], 1, seed=21,
                                      max_replicates=200_000, chunk_size=200_000)
        mean = batch.terminal_sizes.sum() / batch.replicates
        se = math.sqrt(2 * TERNARY.half_variance * n / batch.replicates)
        assert abs(mean - 1.0) < 4 * se

    def test_low_confidence_warning(self):
        with pytest.warns(AcceptanceBudgetExhausted):
            batch = run_conditioned_batch(
                TERNARY, 12, 1, [], 10_000, max_replicates=40, seed=2
            )
        assert batch.low_confidence
        assert batch.replicates == 40

    def test_argument_validation(self):
        with pytest.raises(ValueError):
            run_conditioned_batch(TERNARY, 0, 2, [], 10)
        with pytest.raises(ValueError):
            run_conditioned_batch(TERNARY, 5, 0, [], 10)
        with pytest.raises(ValueError):
            run_conditioned_batch(TERNARY, 5, 2, [9], 10)

    def test_chunk_size_default_shrinks_with_horizon(self):
        assert default_chunk_size(10) == 8192
        assert default_chunk_size(4000) < 2048


class TestAgainstExactLaws:
    def test_reduced_distribution_unconditional(self):
        # empirical law of the reduced count at generation 1 of 3 over
        # every replicate (extinct ones count as zero lines)
        n, m = 3, 1
        reps = 400_000
        batch = run_conditioned_batch(
            TERNARY, n, 8, [m], 10**9, max_replicates=reps, seed=31
        )
        assert batch.replicates == reps
        exact = reduced_pmf(TERNARY, m, n, J_max=2)
        for j in (1, 2):
            want = exact.prob(j)
            got = np.sum(batch.reduced_counts[:, 0] == j) / reps
            se = math.sqrt(want * (1 - want) / reps)
            assert abs(got - want) < 3 * se

    def test_conditional_reduced_chi_square(self):
        n, m, C = 12, 6, 3
        batch = run_conditioned_batch(TERNARY, n, C, [m], 20_000, seed=37)
        exact = conditional_reduced_pmf(TERNARY, m, n, C, J_max=12)
        counts = np.bincount(batch.reduced_counts[:, 0], minlength=exact.j_max + 1)[1:]
        obs = list(counts[: exact.j_max])
        exp = list(exact.pmf * batch.accepted)
        # merge sparse upper cells so every expected count is >= 5
        while len(exp) > 1 and exp[-1] < 5.0:
            spill, spill_obs = exp.pop(), obs.pop()
            exp[-1] += spill
            obs[-1] += spill_obs
        obs, exp = np.asarray(obs, dtype=float), np.asarray(exp)
        exp *= obs.sum() / exp.sum()
        stat = scipy.stats.chisquare(obs, exp)
        assert stat.pvalue > 0.001

    def test_mrca_distribution_matches_exact_cdf(self):
        n, C = 3, 2
        batch = run_conditioned_batch(TERNARY, n, C, [], 50_000, seed=41)
        grid = np.arange(1, n + 1)
        exact = mrca_distance_cdf(TERNARY, n, C, grid)
        for u, want in zip(grid, exact):
            got = np.sum(batch.mrca_distances <= u) / batch.accepted
            se = math.sqrt(want * (1 - want) / batch.accepted) + 1e-12
            assert abs(got - want) < 3.5 * se

    def test_mrca_agrees_with_enumeration(self):
        n, C = 4, 3
        batch = run_conditioned_batch(TERNARY, n, C, [], 50_000, seed=43)
        for u in (1, 2, 3):
            want = float(brute_force.mrca_cdf(TPMF, n, C, u))
            got = np.sum(batch.mrca_distances <= u) / batch.accepted
            se = math.sqrt(want * (1 - want) / batch.accepted) + 1e-12
            assert abs(got - want) < 3.5 * se


class TestSerialization:
    def test_json_and_csv(self, tmp_path):
        batch = run_conditioned_batch(TERNARY, 6, 2, [0, 3, 6], 50, seed=51)
        jpath = tmp_path / "batch.json"
        write_batch_json(batch, jpath)
        import json

        data = json.loads(jpath.read_text())
        assert data["law"] == "ternary_uniform"
        assert data["accepted"] == batch.accepted
        assert data["query_generations"] == [0, 3, 6]

        cpath = tmp_path / "batch.csv"
        write_batch_csv(batch, cpath)
        lines = cpath.read_text().strip().splitlines()
        assert lines[0] == (
            "replicate_id,terminal_size,mrca_distance,"
            "reduced_at_0,reduced_at_3,reduced_at_6"
        )
        assert len(lines) == batch.accepted + 1
        first = [int(tok) for tok in lines[1].split(",")]
        assert first[0] == batch.replicate_ids[0]
        assert first[1] == batch.terminal_sizes[0]


class TestTerminalSizeScaling:
    # Z(n)/(Bn) given survival approaches a standard exponential; with
    # the bound at 10*Bn the acceptance event is survival up to an
    # exp(-10) truncation, far below the tested resolution.

    def test_scaled_terminal_size_near_exponential(self):
        n = 100
        C = 10 * int(LF.half_variance * n)
        batch = run_conditioned_batch(LF, n, C, [], 5_000, seed=61)
        scaled = batch.terminal_sizes / (LF.half_variance * n)
        dist = scipy.stats.kstest(scaled, "expon").statistic
        assert dist < 0.05

    @pytest.mark.slow
    def test_scaled_terminal_size_near_exponential_at_scale(self):
        n = 1000
        C = 10 * int(LF.half_variance * n)
        batch = run_conditioned_batch(LF, n, C, [], 100_000, seed=62)
        scaled = batch.terminal_sizes / (LF.half_variance * n)
        dist = scipy.stats.kstest(scaled, "expon").statistic
        assert dist < 0.02
