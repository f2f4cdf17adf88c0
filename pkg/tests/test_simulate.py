import numpy as np
import pytest

from fuzzyjump import (
    SimulationConfig,
    default_centroids,
    equicorrelation_sqrt,
    sample_series,
    scenario_preset,
    simulate_latent_scores,
    softmax_mixing,
)


def make_cfg(**kw):
    base = dict(n_states=2, n_features=5, n_steps=500, noise_scale=0.2, seed=0)
    base.update(kw)
    return SimulationConfig(**base)


class TestLatentScores:
    def test_vanishing_noise_pins_scores_at_zero(self):
        alpha = simulate_latent_scores(make_cfg(noise_scale=1e-12))
        assert np.abs(alpha).max() < 1e-9

    def test_no_persistence_gives_iid_noise(self):
        cfg = make_cfg(persistence=0.0, noise_scale=0.7, n_steps=100_000)
        alpha = simulate_latent_scores(cfg).ravel()
        n = alpha.size
        assert abs(alpha.mean()) < 3 * 0.7 / np.sqrt(n)
        assert alpha.std() == pytest.approx(0.7, rel=0.02)

    def test_deterministic(self):
        a = simulate_latent_scores(make_cfg(seed=5))
        b = simulate_latent_scores(make_cfg(seed=5))
        assert (a == b).all()

    def test_shape_excludes_pinned_state(self):
        alpha = simulate_latent_scores(make_cfg(n_states=3, n_steps=50))
        assert alpha.shape == (50, 2)


class TestSoftmax:
    def test_zero_scores_give_uniform(self):
        pi = softmax_mixing(np.zeros((4, 2)))
        assert pi == pytest.approx(np.full((4, 3), 1 / 3))

    def test_log_three(self):
        pi = softmax_mixing(np.array([[np.log(3.0)]]))
        assert pi[0] == pytest.approx([0.75, 0.25])

    def test_not_shift_invariant(self):
        # the last score is pinned at zero, so shifting the others changes pi
        base = softmax_mixing(np.array([[0.3, -0.2]]))
        shifted = softmax_mixing(np.array([[1.3, 0.8]]))
        assert np.abs(base - shifted).max() > 1e-3

    def test_overflow_safe(self):
        pi = softmax_mixing(np.array([[900.0, -900.0]]))
        assert np.isfinite(pi).all()
        assert pi[0, 0] == pytest.approx(1.0)


class TestEquicorrelation:
    def test_square_root_reconstructs_covariance(self):
        for p, rho in [(1, 0.0), (3, 0.0), (5, 0.4), (4, -0.2)]:
            root = equicorrelation_sqrt(p, rho)
            target = (1 - rho) * np.eye(p) + rho * np.ones((p, p)) if p > 1 \
                else np.eye(1)
            assert root @ root == pytest.approx(target, abs=1e-12)
            assert root == pytest.approx(root.T)

    def test_rejects_degenerate(self):
        with pytest.raises(ValueError):
            equicorrelation_sqrt(3, -0.5)
        with pytest.raises(ValueError):
            SimulationConfig(n_states=2, n_features=3, n_steps=10,
                             noise_scale=1.0, correlation=-0.5)


class TestSampleSeries:
    def test_mixing_rows_on_simplex(self):
        series = sample_series(make_cfg(noise_scale=5.0, n_steps=2000))
        assert np.abs(series.pi_true.sum(axis=1) - 1.0).max() < 1e-12
        assert (series.pi_true >= 0).all()

    def test_vanishing_noise_balanced_components(self):
        # tau -> 0 keeps pi at exactly 1/2, so component counts are binomial
        cfg = make_cfg(noise_scale=1e-12, correlation=0.0, n_steps=4000)
        series = sample_series(cfg)
        frac = (series.component_labels == 0).mean()
        assert abs(frac - 0.5) < 3 * 0.5 / np.sqrt(cfg.n_steps)

    def test_default_centroids(self):
        assert (default_centroids(2, 3) == [[1, 1, 1], [-1, -1, -1]]).all()
        assert (default_centroids(3, 2) == [[1, 1], [0, 0], [-1, -1]]).all()
        with pytest.raises(ValueError):
            default_centroids(4, 2)

    def test_emission_moments_match_components(self):
        cfg = make_cfg(noise_scale=5.0, n_steps=20_000, correlation=0.0, seed=3)
        series = sample_series(cfg)
        for c in (0, 1):
            rows = series.y[series.component_labels == c]
            assert rows.mean(axis=0) == pytest.approx(cfg.centroids[c], abs=0.05)
            cov = np.cov(rows, rowvar=False)
            off = cov[~np.eye(cfg.n_features, dtype=bool)]
            assert np.abs(off).max() < 0.05
            assert np.diag(cov) == pytest.approx(np.ones(cfg.n_features), abs=0.05)

    def test_deterministic_and_labels_match_pi_support(self):
        a = sample_series(make_cfg(seed=11))
        b = sample_series(make_cfg(seed=11))
        assert (a.y == b.y).all()
        assert (a.component_labels == b.component_labels).all()
        assert a.component_labels.min() >= 0
        assert a.component_labels.max() < 2


class TestScenarioPresets:
    def test_soft(self):
        preset = scenario_preset("soft")
        assert preset["noise_scale"] == 0.2
        assert preset["persistence"] == 0.99

    def test_hard(self):
        assert scenario_preset("hard")["noise_scale"] == 5.0

    def test_unknown_rejected(self):
        with pytest.raises(ValueError):
            scenario_preset("medium")

    def test_hard_probabilities_sharper_than_soft(self):
        seed = 21
        soft = sample_series(SimulationConfig(
            n_states=2, n_features=5, n_steps=3000, seed=seed,
            **scenario_preset("soft")))
        hard = sample_series(SimulationConfig(
            n_states=2, n_features=5, n_steps=3000, seed=seed,
            **scenario_preset("hard")))
        sharp = lambda pi: (pi.max(axis=1) > 0.99).mean()
        assert sharp(hard.pi_true) > sharp(soft.pi_true)
