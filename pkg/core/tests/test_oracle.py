import numpy as np
from django.test import SimpleTestCase, override_settings

from core.exceptions import ConfigInvalid
from core.services.metrics import nsnr, nsnr_min
from core.services.oracle import OracleConfig, brute_force_nsnr_min
from core.services.spd import assert_spd, identity

from .helpers import random_pairs, rng_for, swap_example

SMALL = OracleConfig(n_random=5_000, refine_steps=200)


class OracleTests(SimpleTestCase):
    def test_identity_pair(self):
        result = brute_force_nsnr_min(identity(3), identity(3), SMALL, rng_for(0))
        self.assertAlmostEqual(result.value, 1.0, places=12)

    def test_swap_example(self):
        C, Chat = swap_example(0.1)
        result = brute_force_nsnr_min(C, Chat, SMALL, rng_for(1))
        self.assertAlmostEqual(result.value, 400 / 10201, delta=1e-6)

    def test_agrees_with_closed_form(self):
        for i, (C, Chat) in enumerate(random_pairs(10)):
            result = brute_force_nsnr_min(C, Chat, SMALL, rng_for(10 + i))
            closed = nsnr_min(C, Chat)
            self.assertAlmostEqual(result.value, closed, delta=1e-6)
            self.assertGreaterEqual(result.value, closed - 1e-9)

    def test_returned_target_attains_value(self):
        C, Chat = next(random_pairs(1))
        result = brute_force_nsnr_min(C, Chat, SMALL, rng_for(2))
        self.assertAlmostEqual(nsnr(result.target, C, Chat), result.value, delta=1e-9)

    def test_random_search_alone_stays_above_minimum(self):
        C = assert_spd(np.diag([1.0, 2.0, 5.0, 30.0]))
        cfg = OracleConfig(n_random=2_000, refine_steps=0)
        result = brute_force_nsnr_min(C, identity(4), cfg, rng_for(3))
        self.assertGreaterEqual(result.value, nsnr_min(C, identity(4)) - 1e-12)
        self.assertEqual(result.steps, 0)

    def test_invalid_config(self):
        with self.assertRaises(ConfigInvalid):
            OracleConfig(n_random=0)
        with self.assertRaises(ConfigInvalid):
            OracleConfig(refine_steps=-1)

    @override_settings(NSNR_ORACLE_RANDOM=123, NSNR_ORACLE_REFINE_STEPS=4)
    def test_config_from_settings(self):
        cfg = OracleConfig.from_settings(tol=1e-8)
        self.assertEqual((cfg.n_random, cfg.refine_steps, cfg.tol), (123, 4, 1e-8))
