import os
import sys
import tempfile
import unittest

import numpy as np

sys.path.insert(0, os.path.abspath(os.path.join(os.path.dirname(__file__), "..")))
__package__ = "distance"
from .context import random_dataset

from ppgen.distance.measure import (
    cross_distance_matrix,
    distance,
    distance_matrix,
    load_distance_cache,
    normalizers,
    save_distance_cache,
    write_matrix_csv,
)
from ppgen.errors import DegenerateInputError, SchemaError
from ppgen.features.dataset import Dataset, mask_traits
from ppgen.features.schema import VariableDef, VariableSchema, reference_schema


def tiny_schema() -> VariableSchema:
    return VariableSchema(
        (
            VariableDef("l_1", "likert", (1, 2, 3), (0, 1)),
            VariableDef("b_1", "binary", (4,)),
            VariableDef("b_2", "binary", (5,)),
        ),
        5,
    )


class TestDistance(unittest.TestCase):
    def setUp(self):
        self.schema = tiny_schema()
        self.dataset = Dataset.from_trait_matrix(
            self.schema,
            ["a", "b", "c", "d"],
            [
                [1, 0, 0, 1, 1],
                [0, 0, 1, 1, 1],
                [1, 0, 0, 0, 0],
                [0, 1, 0, 1, 0],
            ],
        )

    def _d(self, ii, jj):
        pp = self.dataset.participants
        return distance(self.schema, pp[ii].explanatory, pp[jj].explanatory, 1.0, 2)

    def test_values(self):
        # identical Likert, both binary traits shared: clamped at 0
        self.assertEqual(self._d(0, 0), 0.0)
        # full Likert range, both binary shared
        self.assertAlmostEqual(self._d(0, 1), 0.0)
        # nothing in common
        self.assertAlmostEqual(self._d(1, 2), 1.0)
        self.assertAlmostEqual(self._d(1, 3), 0.5 - 0.5)
        self.assertAlmostEqual(self._d(2, 3), 0.5)

    def test_zero_normalizer(self):
        pp = self.dataset.participants
        with self.assertRaises(DegenerateInputError):
            distance(self.schema, pp[0].explanatory, pp[1].explanatory, 1.0, 0)
        with self.assertRaises(DegenerateInputError):
            distance(self.schema, pp[0].explanatory, pp[1].explanatory, 0.0, 2)

    def test_matrix(self):
        dm = distance_matrix(self.dataset)
        for ii in range(4):
            for jj in range(4):
                expected = 0.0 if ii == jj else self._d(ii, jj)
                self.assertAlmostEqual(dm.values[ii, jj], expected)
        self.assertEqual(dm.ids, ("a", "b", "c", "d"))
        one = distance_matrix(self.dataset, diagonal_policy="one")
        np.testing.assert_array_equal(np.diag(one.values), 1.0)

    def test_bad_policy(self):
        with self.assertRaises(ValueError):
            distance_matrix(self.dataset, diagonal_policy="two")

    def test_masked_normalizers(self):
        self.assertEqual(normalizers(self.schema), (1.0, 2))
        self.assertEqual(normalizers(self.schema, {1, 2, 3, 4}), (1.0, 1))
        masked = mask_traits(self.dataset, {1, 2, 3, 4})
        dm = distance_matrix(masked)
        # only b_1 counts: d(c, d) = 0.5 / 1 - 0
        self.assertAlmostEqual(dm.values[2, 3], 0.5)
        self.assertAlmostEqual(dm.values[1, 2], 1.0)
        with self.assertRaises(DegenerateInputError):
            distance_matrix(mask_traits(self.dataset, {1, 2, 3}))

    def test_submatrix(self):
        dm = distance_matrix(self.dataset)
        sub = dm.submatrix([3, 1])
        self.assertEqual(sub.ids, ("d", "b"))
        self.assertAlmostEqual(sub.values[0, 1], dm.values[3, 1])


class TestDistanceProperties(unittest.TestCase):
    def setUp(self):
        self.schema = reference_schema()
        self.dataset = random_dataset(self.schema, 150, seed=7, rate=0.3)

    def test_range_symmetry(self):
        values = distance_matrix(self.dataset).values
        self.assertTrue(np.all(values >= 0))
        self.assertTrue(np.all(values <= 1))
        np.testing.assert_array_equal(values, values.T)
        np.testing.assert_array_equal(np.diag(values), 0)

    def test_scalar_agreement(self):
        values = distance_matrix(self.dataset).values
        range_sum, binary_count = normalizers(self.schema)
        pp = self.dataset.participants
        rng = np.random.default_rng(3)
        for ii, jj in rng.integers(0, len(pp), size=(200, 2)):
            if ii == jj:
                continue
            self.assertAlmostEqual(
                values[ii, jj],
                distance(self.schema, pp[ii].explanatory, pp[jj].explanatory, range_sum, binary_count),
                places=12,
            )

    def test_self_distance(self):
        # d(a, a) is 0 even without the forced diagonal
        cross = cross_distance_matrix(self.dataset, self.dataset)
        np.testing.assert_array_equal(np.diag(cross), 0)

    def test_threads(self):
        serial = distance_matrix(self.dataset).values
        parallel = distance_matrix(self.dataset, threads=2).values
        np.testing.assert_array_equal(serial, parallel)


class TestCrossDistance(unittest.TestCase):
    def test_shape_and_mask(self):
        schema = reference_schema()
        gen = random_dataset(schema, 10, seed=1)
        val = random_dataset(schema, 4, seed=2)
        cross = cross_distance_matrix(gen, val)
        self.assertEqual(cross.shape, (10, 4))
        with self.assertRaises(SchemaError):
            cross_distance_matrix(mask_traits(gen, range(1, 100)), val)


class TestDistanceIO(unittest.TestCase):
    def setUp(self):
        self.dataset = random_dataset(reference_schema(), 12, seed=5)
        self.dm = distance_matrix(self.dataset)

    def test_cache(self):
        with tempfile.TemporaryDirectory() as tmp:
            path = os.path.join(tmp, "distances.h5")
            save_distance_cache(self.dm, path)
            loaded = load_distance_cache(path)
        np.testing.assert_array_equal(loaded.values, self.dm.values)
        self.assertEqual(loaded.ids, self.dm.ids)
        self.assertEqual(loaded.diagonal_policy, "zero")

    def test_csv(self):
        import pandas as pd

        with tempfile.TemporaryDirectory() as tmp:
            path = os.path.join(tmp, "distances.csv")
            write_matrix_csv(self.dm.values, path, self.dataset.ids)
            frame = pd.read_csv(path, index_col=0)
        self.assertEqual(list(frame.columns), self.dataset.ids)
        np.testing.assert_allclose(frame.to_numpy(), self.dm.values, rtol=0, atol=1e-15)


if __name__ == "__main__":
    unittest.main()
