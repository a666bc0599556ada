import os
import sys
import unittest

import numpy as np

sys.path.insert(0, os.path.abspath(os.path.join(os.path.dirname(__file__), "..")))
__package__ = "stats"
from .context import ppgen  # noqa: F401

from ppgen.stats.correction import bonferroni, correct, holm


class TestHolm(unittest.TestCase):
    def test_all_rejected(self):
        decision = holm([0.001, 0.02, 0.03], alpha=0.05, m=3)
        self.assertEqual(decision.rejected, (True, True, True))
        self.assertEqual(decision.n_rejected, 3)

    def test_input_order(self):
        decision = holm([0.03, 0.001, 0.02], alpha=0.05)
        self.assertEqual(decision.rejected, (True, True, True))
        decision = holm([0.04, 0.001, 0.03], alpha=0.05)
        # 0.001 <= 0.05 / 3, then 0.03 > 0.025 stops
        self.assertEqual(decision.rejected, (False, True, False))

    def test_stops_at_first_failure(self):
        decision = holm([0.001, 0.3, 0.01], alpha=0.05, m=3)
        # thresholds 0.0167, 0.025, 0.05 against 0.001, 0.01, 0.3
        self.assertEqual(decision.rejected, (True, False, True))

    def test_family_size(self):
        decision = holm([0.01, 0.02], alpha=0.05, m=10)
        self.assertEqual(decision.rejected, (False, False))
        self.assertEqual(decision.m, 10)
        with self.assertRaises(ValueError):
            holm([0.01, 0.02, 0.03], alpha=0.05, m=2)

    def test_trivial(self):
        self.assertFalse(holm([1.0, 1.0, 1.0], alpha=0.5).any_rejected)
        empty = holm([], alpha=0.05)
        self.assertEqual(empty.rejected, ())
        self.assertFalse(empty.any_rejected)

    def test_invalid(self):
        with self.assertRaises(ValueError):
            holm([0.1, 1.2])
        with self.assertRaises(ValueError):
            holm([0.1], alpha=1.0)

    def test_prefix_property(self):
        rng = np.random.default_rng(1)
        for _ in range(500):
            p = rng.random(rng.integers(1, 12)) ** 3
            decision = holm(p, alpha=0.05)
            ordered = np.asarray(decision.rejected)[np.argsort(p, kind="stable")]
            k = int(ordered.sum())
            self.assertTrue(ordered[:k].all())
            self.assertFalse(ordered[k:].any())

    def test_not_less_than_bonferroni(self):
        rng = np.random.default_rng(2)
        for _ in range(500):
            p = rng.random(rng.integers(1, 12)) ** 4
            hh = holm(p, alpha=0.05)
            bb = bonferroni(p, alpha=0.05)
            self.assertGreaterEqual(hh.n_rejected, bb.n_rejected)
            for rb, rh in zip(bb.rejected, hh.rejected):
                if rb:
                    self.assertTrue(rh)

    def test_adjusted(self):
        decision = holm([0.01, 0.04, 0.03], alpha=0.05)
        np.testing.assert_allclose(decision.adjusted(), [0.03, 0.06, 0.06])
        rejected = decision.adjusted() <= 0.05
        self.assertEqual(tuple(rejected), decision.rejected)


class TestCorrect(unittest.TestCase):
    def test_dispatch(self):
        p = [0.001, 0.02, 0.03]
        self.assertEqual(correct(p, 0.05).rejected, holm(p, 0.05).rejected)
        decision = correct(p, 0.05, method="bonferroni")
        self.assertEqual(decision.method, "bonferroni")
        # 0.02 and 0.03 pass the Holm steps but not alpha / 3
        self.assertEqual(decision.rejected, (True, False, False))
        np.testing.assert_allclose(decision.adjusted(), [0.003, 0.06, 0.09])
        with self.assertRaises(ValueError):
            correct(p, 0.05, method="sidak")


if __name__ == "__main__":
    unittest.main()
