import numpy as np
import pytest
from conftest import brute_force_weighted_median

from fuzzyjump import (
    GOWER,
    SQUARED_EUCLIDEAN,
    DataMatrix,
    Feature,
    FeatureSchema,
    FitConfig,
    adjusted_rand_index,
    feature_ranges,
    fit,
    initialize,
    map_labels,
    objective_value,
    sweep_memberships,
    update_prototypes,
    weighted_median,
    weighted_mode,
)
from fuzzyjump.fitting import _coordinate_descent


def two_block_data(n_per_block=40, n_features=2, gap=4.0, noise=0.3, seed=0):
    rng = np.random.default_rng(seed)
    a = rng.normal(gap / 2, noise, size=(n_per_block, n_features))
    b = rng.normal(-gap / 2, noise, size=(n_per_block, n_features))
    values = np.vstack([a, b])
    labels = np.array([0] * n_per_block + [1] * n_per_block)
    schema = FeatureSchema.continuous([f"f{i}" for i in range(n_features)])
    return DataMatrix(schema, values), labels


class TestWeightedMedian:
    def test_cumulative_rule_example(self):
        # weights (1,1,3): half the total weight is 2.5, first reached at 3
        assert weighted_median(np.array([1.0, 2.0, 3.0]),
                               np.array([1.0, 1.0, 3.0])) == 3.0

    def test_equal_weights_odd_count_is_median(self):
        vals = np.array([7.0, 1.0, 5.0, 3.0, 9.0])
        assert weighted_median(vals, np.ones(5)) == np.median(vals)

    def test_attains_brute_force_minimum(self):
        rng = np.random.default_rng(10)
        for _ in range(300):
            n = int(rng.integers(1, 8))
            vals = np.round(rng.normal(size=n), 3)
            weights = rng.integers(1, 10, size=n) / 4.0
            got = weighted_median(vals, weights)
            _, best_loss = brute_force_weighted_median(vals, weights)
            got_loss = (weights * np.abs(vals - got)).sum()
            assert got_loss == pytest.approx(best_loss, abs=1e-12)


class TestWeightedMode:
    def test_weight_sums_decide(self):
        # A appears twice with weight 0.2 each, B once with 0.5
        codes = np.array([0, 0, 1])
        assert weighted_mode(codes, np.array([0.2, 0.2, 0.5]), 2) == 1

    def test_tie_breaks_to_earliest_level(self):
        codes = np.array([1, 0])
        assert weighted_mode(codes, np.array([0.5, 0.5]), 2) == 0

    def test_attains_max_agreement_weight(self):
        rng = np.random.default_rng(11)
        for _ in range(300):
            n = int(rng.integers(1, 8))
            n_levels = int(rng.integers(1, 4))
            codes = rng.integers(0, n_levels, size=n)
            weights = rng.uniform(0.1, 2.0, size=n)
            got = weighted_mode(codes, weights, n_levels)
            agreement = [weights[codes == c].sum() for c in range(n_levels)]
            assert agreement[got] == pytest.approx(max(agreement))


class TestUpdatePrototypes:
    def test_weighted_median_via_state_weights(self):
        # m=1 makes the state weights equal the memberships
        data = DataMatrix(FeatureSchema.continuous(["x"]), [[1.0], [2.0], [3.0]])
        raw = np.array([1.0, 1.0, 3.0])
        s1 = 0.9 * raw / raw.max()
        s = np.column_stack([s1, 1.0 - s1])
        protos = update_prototypes(data, s, 1.0, GOWER, feature_ranges(data))
        assert protos.values[0, 0] == 3.0

    def test_categorical_mode(self):
        schema = FeatureSchema((Feature("c", ("A", "B")),))
        data = DataMatrix(schema, [[0], [0], [1]])
        s = np.array([[0.2, 0.8], [0.2, 0.8], [0.5, 0.5]])
        protos = update_prototypes(data, s, 1.0, GOWER, feature_ranges(data))
        assert protos.values[0, 0] == 1.0  # weights 0.4 vs 0.5

    def test_euclidean_mode_is_weighted_mean(self):
        rng = np.random.default_rng(12)
        vals = rng.normal(size=(30, 3))
        data = DataMatrix(FeatureSchema.continuous(["a", "b", "c"]), vals)
        s = rng.dirichlet(np.ones(2), size=30)
        m = 2.0
        protos = update_prototypes(data, s, m, SQUARED_EUCLIDEAN,
                                   feature_ranges(data))
        w = s ** m
        want = (w.T @ vals) / w.sum(axis=0)[:, None]
        assert protos.values == pytest.approx(want)

    def test_degenerate_state_reseeded_from_data(self):
        data = DataMatrix(FeatureSchema.continuous(["x"]), [[1.0], [2.0], [3.0]])
        s = np.column_stack([np.ones(3), np.zeros(3)])
        rng = np.random.default_rng(5)
        protos = update_prototypes(data, s, 2.0, GOWER, feature_ranges(data),
                                   rng=rng)
        assert protos.reseeded == (1,)
        assert protos.values[1, 0] in (1.0, 2.0, 3.0)

    def test_prototype_entries_within_observed_range(self):
        rng = np.random.default_rng(13)
        data, _ = two_block_data(seed=13)
        s = rng.dirichlet(np.ones(3), size=data.n_rows)
        protos = update_prototypes(data, s, 1.5, GOWER, feature_ranges(data))
        for p in range(data.n_features):
            col = data.values[:, p]
            assert (protos.values[:, p] >= col.min()).all()
            assert (protos.values[:, p] <= col.max()).all()


class TestInitialize:
    def test_rows_on_simplex(self):
        data, _ = two_block_data()
        cfg = FitConfig(n_states=2, fuzziness=1.5, jump_penalty=0.1, seed=3)
        s, protos = initialize(data, cfg, 0)
        assert s.shape == (data.n_rows, 2)
        assert s.sum(axis=1) == pytest.approx(np.ones(data.n_rows))
        assert (s >= 0).all() and (s <= 1).all()

    def test_restarts_differ(self):
        data, _ = two_block_data()
        cfg = FitConfig(n_states=2, fuzziness=1.5, jump_penalty=0.1, seed=3)
        s0, _ = initialize(data, cfg, 0)
        s1, _ = initialize(data, cfg, 1)
        assert np.abs(s0 - s1).max() > 1e-3

    def test_same_restart_bit_identical(self):
        data, _ = two_block_data()
        cfg = FitConfig(n_states=2, fuzziness=1.5, jump_penalty=0.1, seed=3)
        s0, p0 = initialize(data, cfg, 4)
        s1, p1 = initialize(data, cfg, 4)
        assert (s0 == s1).all()
        assert (p0.values == p1.values).all()


class TestSweep:
    def test_unpenalized_rows_decouple(self):
        data, _ = two_block_data(n_per_block=10)
        ranges = feature_ranges(data)
        cfg = FitConfig(n_states=2, fuzziness=2.0, jump_penalty=0.0, seed=0)
        rng = np.random.default_rng(6)
        s = rng.dirichlet(np.ones(2), size=data.n_rows)
        protos = update_prototypes(data, s, 2.0, GOWER, ranges)
        forward = sweep_memberships(data, s, protos, cfg, ranges)
        # solve rows in reverse order: same answer when decoupled
        rev = sweep_memberships(
            DataMatrix(data.schema, data.values[::-1]), s[::-1], protos, cfg,
            ranges)[::-1]
        assert forward == pytest.approx(rev, abs=1e-8)

    def test_single_row_edge(self):
        data = DataMatrix(FeatureSchema.continuous(["x", "y"]), [[0.5, 1.0]])
        ranges = feature_ranges(data)
        cfg = FitConfig(n_states=2, fuzziness=2.0, jump_penalty=5.0, seed=0)
        s = np.array([[0.4, 0.6]])
        protos = update_prototypes(data, s, 2.0, GOWER, ranges)
        out = sweep_memberships(data, s, protos, cfg, ranges)
        assert out.shape == (1, 2)
        assert out.sum() == pytest.approx(1.0)

    def test_huge_penalty_flattens_rows(self):
        # the penalty-dominated limit equalizes rows; the averaging spreads
        # through the sequence one sweep at a time, so let it converge
        data, _ = two_block_data(n_per_block=10, seed=7)
        cfg = FitConfig(n_states=2, fuzziness=1.5, jump_penalty=1e6,
                        restarts=2, seed=1, max_outer_iter=500,
                        outer_tol=1e-12)
        result = fit(data, cfg)
        spread = np.abs(result.memberships - result.memberships[0]).max()
        assert spread < 1e-3


class TestFit:
    def test_recovers_two_blocks_exactly(self):
        data, labels = two_block_data(seed=21)
        cfg = FitConfig(n_states=2, fuzziness=1.25, jump_penalty=0.1,
                        restarts=5, seed=2)
        result = fit(data, cfg)
        assert adjusted_rand_index(labels, map_labels(result.memberships)) == 1.0

    def test_deterministic(self):
        data, _ = two_block_data(seed=22)
        cfg = FitConfig(n_states=2, fuzziness=1.5, jump_penalty=0.3,
                        restarts=3, seed=9)
        a = fit(data, cfg)
        b = fit(data, cfg)
        assert (a.memberships == b.memberships).all()
        assert (a.prototypes.values == b.prototypes.values).all()
        assert a.objective == b.objective
        assert (a.restart_objectives == b.restart_objectives).all()

    def test_trace_non_increasing_and_best_restart(self):
        data, _ = two_block_data(seed=23, noise=1.0)
        cfg = FitConfig(n_states=2, fuzziness=2.0, jump_penalty=0.5,
                        restarts=4, seed=11)
        result = fit(data, cfg)
        assert (np.diff(result.objective_trace) <= 1e-6).all()
        assert result.objective == result.restart_objectives.min()

    def test_trace_endpoint_matches_public_objective(self):
        data, _ = two_block_data(seed=24)
        cfg = FitConfig(n_states=2, fuzziness=1.5, jump_penalty=0.2,
                        restarts=2, seed=12)
        result = fit(data, cfg)
        recomputed = objective_value(data, result.memberships,
                                     result.prototypes, cfg,
                                     feature_ranges(data))
        assert recomputed == pytest.approx(result.objective, rel=1e-9)

    def test_state_relabeling_covariance(self):
        # exact covariance holds in exact arithmetic; numerically, test one
        # outer iteration tightly (before float noise amplifies through the
        # sequential sweep) and the converged prototypes and labels, which
        # snap to data values and are robust
        data, _ = two_block_data(seed=25, noise=0.8)
        ranges = feature_ranges(data)
        rng = np.random.default_rng(40)
        s0 = rng.dirichlet(np.ones(3), size=data.n_rows)
        perm = [2, 0, 1]

        one_step = FitConfig(n_states=3, fuzziness=1.6, jump_penalty=0.4,
                             seed=13, max_outer_iter=1, pgd_tol=1e-16,
                             pgd_max_iter=5000)
        s_base, p_base, _, _ = _coordinate_descent(data, one_step, s0, ranges, None)
        s_perm, p_perm, _, _ = _coordinate_descent(data, one_step, s0[:, perm],
                                                   ranges, None)
        assert s_perm == pytest.approx(s_base[:, perm], abs=1e-6)
        assert p_perm.values == pytest.approx(p_base.values[perm], abs=1e-12)

        full = FitConfig(n_states=3, fuzziness=1.6, jump_penalty=0.4, seed=13,
                         max_outer_iter=200, outer_tol=1e-12)
        s_base, p_base, _, _ = _coordinate_descent(data, full, s0, ranges, None)
        s_perm, p_perm, _, _ = _coordinate_descent(data, full, s0[:, perm],
                                                   ranges, None)
        assert p_perm.values == pytest.approx(p_base.values[perm], abs=1e-12)
        inverse = np.argsort(perm)
        assert (map_labels(s_perm) == inverse[map_labels(s_base)]).all()

    def test_near_hard_limit(self):
        data, _ = two_block_data(seed=26)
        cfg = FitConfig(n_states=2, fuzziness=1.01, jump_penalty=0.5,
                        restarts=3, seed=14)
        result = fit(data, cfg)
        top = result.memberships.max(axis=1)
        assert (top >= 0.95).mean() >= 0.9

    def test_errors(self):
        data, _ = two_block_data(n_per_block=1)
        with pytest.raises(ValueError):
            fit(data, FitConfig(n_states=5, fuzziness=1.5, jump_penalty=0.1))
        schema = FeatureSchema((Feature("c", ("A", "B")),))
        cat = DataMatrix(schema, [[0], [1], [0]])
        with pytest.raises(ValueError):
            fit(cat, FitConfig(n_states=2, fuzziness=1.5, jump_penalty=0.1,
                               distance_mode=SQUARED_EUCLIDEAN))


class TestMapLabels:
    def test_one_hot(self):
        s = np.array([[0.0, 1.0], [1.0, 0.0]])
        assert map_labels(s).tolist() == [1, 0]

    def test_tie_breaks_low(self):
        assert map_labels(np.array([[0.5, 0.5]])).tolist() == [0]

    def test_argmax(self):
        assert map_labels(np.array([[0.2, 0.3, 0.5]])).tolist() == [2]
