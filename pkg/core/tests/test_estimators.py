import numpy as np
from django.test import SimpleTestCase
from numpy.testing import assert_allclose

from core.exceptions import ConfigInvalid, DimensionMismatch, NotPositiveDefinite
from core.models import EstimatorKind
from core.services.estimators import (
    EstimatorSpec, SampleSet, build_estimate, diagonal_loading, knowledge_aided, ledoit_wolf,
    sample_covariance,
)
from core.services.metrics import d_frobenius
from core.services.randgen import mvn_sample
from core.services.spd import assert_spd, identity

from .helpers import rng_for


class SampleCovarianceTests(SimpleTestCase):
    def test_hand_computed(self):
        data = SampleSet.from_rows([[1.0, 0.0], [0.0, 2.0]])
        assert_allclose(sample_covariance(data), np.diag([0.5, 2.0]))

    def test_no_mean_subtraction(self):
        data = SampleSet.from_rows([[1.0, 1.0], [1.0, 1.0]])
        assert_allclose(sample_covariance(data), np.ones((2, 2)))

    def test_single_row(self):
        data = SampleSet.from_rows([3.0, 4.0])
        self.assertEqual(data.n, 1)
        assert_allclose(sample_covariance(data), [[9.0, 12.0], [12.0, 16.0]])

    def test_rejects_empty(self):
        with self.assertRaises(DimensionMismatch):
            SampleSet(samples=np.zeros((0, 3)))


class DiagonalLoadingTests(SimpleTestCase):
    def test_adds_lambda(self):
        assert_allclose(diagonal_loading(np.diag([1.0, 2.0]), 0.5).entries, np.diag([1.5, 2.5]))

    def test_zero_lambda_on_singular_matrix(self):
        with self.assertRaises(NotPositiveDefinite):
            diagonal_loading(np.ones((2, 2)), 0.0)

    def test_loading_rescues_rank_deficiency(self):
        M = diagonal_loading(np.ones((2, 2)), 1.0)
        assert_allclose(M.eig.values, [1.0, 3.0], atol=1e-14)

    def test_negative_lambda(self):
        with self.assertRaises(ConfigInvalid):
            diagonal_loading(np.eye(2), -0.1)


class LedoitWolfTests(SimpleTestCase):
    def test_intensity_in_unit_interval(self):
        truth = assert_spd(np.diag([1.0, 2.0, 5.0, 10.0]))
        for i, n in enumerate((5, 20, 200)):
            estimate, intensity = ledoit_wolf(mvn_sample(truth, n, rng_for(i)))
            self.assertGreaterEqual(intensity, 0.0)
            self.assertLessEqual(intensity, 1.0)
            self.assertEqual(estimate.dim, 4)

    def test_trace_is_preserved(self):
        data = mvn_sample(identity(5), 30, rng_for(1))
        estimate, _ = ledoit_wolf(data)
        self.assertAlmostEqual(np.trace(estimate.entries), np.trace(sample_covariance(data)), places=10)

    def test_rank_deficient_sample_gives_pd_estimate(self):
        data = mvn_sample(identity(10), 4, rng_for(2))
        estimate, intensity = ledoit_wolf(data)
        self.assertGreater(intensity, 0.0)
        self.assertGreater(estimate.eig.values[0], 0.0)

    def test_scaled_identity_sample(self):
        data = SampleSet.from_rows([[1.0, 0.0], [0.0, 1.0], [-1.0, 0.0], [0.0, -1.0]])
        with self.assertLogs("core.services.estimators", level="DEBUG") as logs:
            estimate, intensity = ledoit_wolf(data)
        assert_allclose(estimate.entries, 0.5 * np.eye(2))
        self.assertEqual(intensity, 1.0)
        self.assertIn("scaled identity", logs.output[0])

    def test_beats_sample_covariance_on_identity_truth(self):
        truth = identity(10)
        lw_err, sample_err = [], []
        for i in range(200):
            data = mvn_sample(truth, 20, rng_for(1000 + i))
            lw_err.append(d_frobenius(truth, ledoit_wolf(data)[0]))
            sample_err.append(np.linalg.norm(truth.entries - sample_covariance(data)))
        self.assertLessEqual(np.mean(lw_err), np.mean(sample_err))
        self.assertLess(np.mean(lw_err), 0.5 * np.mean(sample_err))

    def test_shrinks_more_with_fewer_samples(self):
        truth = assert_spd(np.diag([1.0, 2.0, 3.0, 4.0, 5.0]))
        small = np.mean([ledoit_wolf(mvn_sample(truth, 6, rng_for(10 + i)))[1] for i in range(50)])
        large = np.mean([ledoit_wolf(mvn_sample(truth, 500, rng_for(100 + i)))[1] for i in range(50)])
        self.assertGreater(small, large)

    def test_needs_two_samples(self):
        with self.assertRaises(ConfigInvalid):
            ledoit_wolf(SampleSet.from_rows([[1.0, 2.0]]))


class KnowledgeAidedTests(SimpleTestCase):
    def test_endpoints(self):
        data = mvn_sample(identity(3), 10, rng_for(3))
        prior = assert_spd(np.diag([1.0, 2.0, 3.0]))
        assert_allclose(knowledge_aided(data, 1.0, prior).entries, prior.entries)
        assert_allclose(knowledge_aided(data, 0.0, prior).entries, sample_covariance(data), atol=1e-14)

    def test_convex_combination(self):
        data = mvn_sample(identity(3), 10, rng_for(4))
        prior = assert_spd(np.diag([1.0, 2.0, 3.0]))
        expected = 0.7 * sample_covariance(data) + 0.3 * prior.entries
        assert_allclose(knowledge_aided(data, 0.3, prior).entries, expected, atol=1e-14)

    def test_lambda_out_of_range(self):
        data = mvn_sample(identity(2), 5, rng_for(5))
        for lam in (-0.1, 1.1):
            with self.assertRaises(ConfigInvalid):
                knowledge_aided(data, lam, identity(2))

    def test_prior_dimension(self):
        data = mvn_sample(identity(2), 5, rng_for(6))
        with self.assertRaises(DimensionMismatch):
            knowledge_aided(data, 0.5, identity(3))


class BuildEstimateTests(SimpleTestCase):
    def setUp(self):
        self.data = mvn_sample(identity(3), 20, rng_for(7))

    def test_sample(self):
        assert_allclose(build_estimate(EstimatorSpec(), self.data).entries, sample_covariance(self.data))

    def test_diagonal_loading(self):
        spec = EstimatorSpec(kind=EstimatorKind.DIAG_LOAD, lam=0.1)
        assert_allclose(build_estimate(spec, self.data).entries, sample_covariance(self.data) + 0.1 * np.eye(3))

    def test_knowledge_aided_uses_truth_prior(self):
        spec = EstimatorSpec(kind=EstimatorKind.KNOWLEDGE_AIDED, lam=1.0)
        prior = assert_spd(np.diag([1.0, 2.0, 3.0]))
        assert_allclose(build_estimate(spec, self.data, prior=prior).entries, prior.entries)

    def test_knowledge_aided_without_prior(self):
        spec = EstimatorSpec(kind=EstimatorKind.KNOWLEDGE_AIDED, lam=0.5)
        with self.assertRaises(ConfigInvalid):
            build_estimate(spec, self.data)

    def test_labels(self):
        self.assertEqual(EstimatorSpec(kind=EstimatorKind.LEDOIT_WOLF).label, "LW")
        self.assertEqual(EstimatorSpec().label, "lambda=0")
        self.assertEqual(EstimatorSpec(kind=EstimatorKind.DIAG_LOAD, lam=0.01).label, "lambda=0.01")

    def test_negative_loading_is_rejected(self):
        with self.assertRaises(ConfigInvalid):
            EstimatorSpec(kind=EstimatorKind.DIAG_LOAD, lam=-1.0).validate()
