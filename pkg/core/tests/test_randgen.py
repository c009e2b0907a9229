import numpy as np
from django.test import SimpleTestCase, override_settings
from numpy.testing import assert_allclose, assert_array_equal

from core.exceptions import ConfigInvalid
from core.models import TruthKind
from core.services.randgen import (
    SeedSpec, TruthScenario, derive_trial_rng, make_truth, mvn_sample, random_spd, wishart_sample,
)
from core.services.spd import assert_spd, identity

from .helpers import TEST_SEED, rng_for


class SeedTests(SimpleTestCase):
    def test_same_seed_same_stream(self):
        a = derive_trial_rng(SeedSpec(TEST_SEED, 3)).standard_normal(5)
        b = derive_trial_rng(SeedSpec(TEST_SEED, 3)).standard_normal(5)
        assert_array_equal(a, b)

    def test_trials_get_distinct_streams(self):
        a = derive_trial_rng(SeedSpec(TEST_SEED, 0)).standard_normal(5)
        b = derive_trial_rng(SeedSpec(TEST_SEED, 1)).standard_normal(5)
        self.assertFalse(np.array_equal(a, b))

    def test_stream_does_not_depend_on_draw_order(self):
        first = derive_trial_rng(SeedSpec(TEST_SEED, 7)).standard_normal(3)
        derive_trial_rng(SeedSpec(TEST_SEED, 6)).standard_normal(1000)
        again = derive_trial_rng(SeedSpec(TEST_SEED, 7)).standard_normal(3)
        assert_array_equal(first, again)

    def test_stream_is_standard_normal(self):
        draws = derive_trial_rng(SeedSpec(TEST_SEED, 0)).standard_normal(100_000)
        self.assertLess(abs(draws.mean()), 0.02)
        self.assertLess(abs(draws.var() - 1.0), 0.02)

    def test_invalid_seeds(self):
        with self.assertRaises(ConfigInvalid):
            SeedSpec(-1)
        with self.assertRaises(ConfigInvalid):
            SeedSpec(2 ** 64)
        with self.assertRaises(ConfigInvalid):
            SeedSpec(1, -2)


class SamplerTests(SimpleTestCase):
    def test_mvn_empirical_covariance(self):
        C = assert_spd([[4.0, 1.0], [1.0, 2.0]])
        X = mvn_sample(C, 100_000, rng_for(0)).samples
        self.assertEqual(X.shape, (100_000, 2))
        S = X.T @ X / X.shape[0]
        self.assertLessEqual(np.linalg.norm(S - C.entries) / np.linalg.norm(C.entries), 0.02)

    def test_mvn_samples_are_read_only(self):
        data = mvn_sample(identity(2), 3, rng_for(1))
        with self.assertRaises(ValueError):
            data.samples[0, 0] = 1.0

    def test_mvn_needs_a_sample(self):
        with self.assertRaises(ConfigInvalid):
            mvn_sample(identity(2), 0, rng_for(2))

    def test_wishart_mean(self):
        scale = assert_spd(np.diag([1.0, 2.0, 3.0]))
        rng = rng_for(3)
        mean = np.mean([wishart_sample(scale, 20, rng) for _ in range(2000)], axis=0)
        self.assertLessEqual(np.linalg.norm(mean - scale.entries) / np.linalg.norm(scale.entries), 0.03)

    def test_mvn_diagonal_variances(self):
        X = mvn_sample(assert_spd(np.diag([4.0, 1.0])), 100_000, rng_for(7)).samples
        variances = np.mean(X * X, axis=0)
        self.assertGreaterEqual(variances[0], 3.8)
        self.assertLessEqual(variances[0], 4.2)
        self.assertAlmostEqual(variances[1], 1.0, delta=0.05)

    def test_wishart_single_dof_is_rank_one(self):
        W = wishart_sample(identity(4), 1, rng_for(8))
        self.assertEqual(np.linalg.matrix_rank(W), 1)
        self.assertGreater(np.trace(W), 0.0)

    def test_wishart_is_symmetric(self):
        W = wishart_sample(identity(4), 3, rng_for(4))
        assert_array_equal(W, W.T)

    def test_random_spd_spectrum_range(self):
        rng = rng_for(5)
        for dim in (2, 5, 10):
            M = random_spd(dim, rng, 1e-2, 1e2)
            self.assertEqual(M.dim, dim)
            self.assertGreaterEqual(M.eig.values[0], 1e-2 * (1 - 1e-12))
            self.assertLessEqual(M.eig.values[-1], 1e2 * (1 + 1e-12))
            assert_allclose(M.eig.vectors.T @ M.eig.vectors, np.eye(dim), atol=1e-10)


class TruthTests(SimpleTestCase):
    def test_identity_truth(self):
        truth = make_truth(TruthScenario(kind=TruthKind.IDENTITY, dim=4))
        assert_array_equal(truth.covariance.entries, np.eye(4))
        self.assertIs(truth.prior, truth.covariance)

    def test_low_rank_truth(self):
        truth = make_truth(TruthScenario(kind=TruthKind.APPROX_LOW_RANK, dim=3))
        assert_allclose(truth.covariance.entries, np.diag([101.0, 1.0, 1.0]))

    def test_random_truth_needs_rng(self):
        with self.assertRaises(ConfigInvalid):
            make_truth(TruthScenario(kind=TruthKind.RANDOM_LOW_RANK_PLUS_WISHART, dim=3))

    def test_random_truth_prior_and_mean(self):
        scenario = TruthScenario(kind=TruthKind.RANDOM_LOW_RANK_PLUS_WISHART, dim=3)
        rng = rng_for(6)
        truths = [make_truth(scenario, rng) for _ in range(1000)]
        assert_allclose(truths[0].prior.entries, np.diag([101.0, 1.0, 1.0]))
        mean = np.mean([t.covariance.entries for t in truths], axis=0)
        self.assertLessEqual(np.linalg.norm(mean - np.diag([101.0, 1.0, 1.0])), 0.2)

    def test_random_truth_is_reproducible(self):
        scenario = TruthScenario(kind=TruthKind.RANDOM_LOW_RANK_PLUS_WISHART, dim=5)
        a = make_truth(scenario, derive_trial_rng(SeedSpec(11, 2)))
        b = make_truth(scenario, derive_trial_rng(SeedSpec(11, 2)))
        assert_array_equal(a.covariance.entries, b.covariance.entries)

    @override_settings(NSNR_WISHART_DOF=7, NSNR_LOW_RANK_GAIN=50.0)
    def test_scenario_from_settings(self):
        scenario = TruthScenario.from_settings("random", 6)
        self.assertEqual(scenario.wishart_dof, 7)
        self.assertEqual(scenario.low_rank_gain, 50.0)
        self.assertTrue(scenario.is_random)

    def test_invalid_scenarios(self):
        with self.assertRaises(ConfigInvalid):
            TruthScenario(kind=TruthKind.IDENTITY, dim=1)
        with self.assertRaises(ConfigInvalid):
            TruthScenario(kind=TruthKind.IDENTITY, dim=3, wishart_dof=0)
