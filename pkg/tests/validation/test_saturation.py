import os
import sys
import tempfile
import unittest

import numpy as np
from monty.serialization import loadfn

sys.path.insert(0, os.path.abspath(os.path.join(os.path.dirname(__file__), "..")))
__package__ = "validation"
from .context import ladder_dataset

from ppgen.errors import DegenerateInputError
from ppgen.features.dataset import Dataset
from ppgen.tools.synthetic import SyntheticDesign, generate
from ppgen.validation.saturation import saturation_check

GEN_LEVELS = [(0, 0), (0, 0), (2, 2), (2, 2), (1, 1)]


class TestSaturationLadder(unittest.TestCase):
    def setUp(self):
        self.gen = ladder_dataset(GEN_LEVELS)
        self.val = ladder_dataset([(0, 2), (0, 0)], prefix="v", role="validation")

    def test_distances(self):
        report = saturation_check(self.gen, self.val)
        np.testing.assert_allclose(report.d1, [0, 0, 0, 0, 0.5])
        np.testing.assert_allclose(report.d2, [0.5, 0])
        self.assertEqual(report.tukey_fences, (0.0, 0.0))
        np.testing.assert_allclose(report.z_scores, [2.0, -0.5])

    def test_tukey(self):
        report = saturation_check(self.gen, self.val)
        self.assertEqual(report.outliers, ("v0",))

    def test_zscore(self):
        report = saturation_check(self.gen, self.val, decision_rule="zscore")
        self.assertEqual(report.outliers, ())
        report = saturation_check(self.gen, self.val, decision_rule="zscore", z_max=1.5)
        self.assertEqual(report.outliers, ("v0",))

    def test_json(self):
        report = saturation_check(self.gen, self.val)
        with tempfile.TemporaryDirectory() as tmpdir:
            path = os.path.join(tmpdir, "saturation.json")
            report.write_json(path)
            data = loadfn(path)
        self.assertEqual(data["outliers"], ["v0"])
        self.assertEqual(data["decision_rule"], "tukey")
        self.assertAlmostEqual(data["d1"]["summary"]["mean"], 0.1)
        self.assertAlmostEqual(data["z_range"][1], 2.0)

    def test_invalid(self):
        with self.assertRaises(ValueError):
            saturation_check(self.gen, self.val, decision_rule="iqr")
        with self.assertRaises(DegenerateInputError):
            saturation_check(self.gen.subset([0]), self.val)
        with self.assertRaises(DegenerateInputError):
            saturation_check(self.gen, self.val.subset([]))


class TestSaturationPlanted(unittest.TestCase):
    @classmethod
    def setUpClass(cls):
        cls.design = SyntheticDesign()
        cls.gen, _ = generate(cls.design, seed=0)
        cls.val, _ = generate(cls.design, seed=0, role="validation")

    def test_same_population(self):
        with self.assertLogs("ppgen", level="WARNING"):
            report = saturation_check(self.gen, self.val)
        # archetype mates are at distance 0
        self.assertTrue(np.all(report.d1 == 0))
        self.assertIsNone(report.z_scores)
        self.assertEqual(report.outliers, ())
        with self.assertRaises(DegenerateInputError):
            saturation_check(self.gen, self.val, decision_rule="zscore")

    def test_generation_as_validation(self):
        val = Dataset.from_trait_matrix(
            self.gen.schema, self.gen.ids, self.gen.trait_matrix, role="validation"
        )
        report = saturation_check(self.gen, val)
        self.assertTrue(np.all(report.d2 == 0))
        self.assertEqual(report.outliers, ())

    def test_far_record(self):
        far = np.zeros(self.design.trait_count, dtype=np.uint8)
        # middle level of every Likert variable: no archetype sits there
        far[[1, 4, 7]] = 1
        matrix = np.vstack([self.val.trait_matrix, far])
        val = Dataset.from_trait_matrix(
            self.gen.schema, [*self.val.ids, "far"], matrix, role="validation"
        )
        report = saturation_check(self.gen, val)
        self.assertEqual(report.outliers, ("far",))
        self.assertAlmostEqual(report.d2[-1], 0.5)
