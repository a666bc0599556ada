import json
import os
import sys
import tempfile
import unittest

import numpy as np

sys.path.insert(0, os.path.abspath(os.path.join(os.path.dirname(__file__), "..")))
__package__ = "features"
from .context import invalid_data_file, small_data_file, small_schema

from ppgen.errors import DataValidationError, SchemaError
from ppgen.features.dataset import (
    Dataset,
    load_dataset,
    mask_traits,
    to_explanatory,
    validate_record,
    write_dataset_csv,
)


class TestExplanatory(unittest.TestCase):
    def setUp(self):
        self.schema = small_schema()

    def test_to_explanatory(self):
        vec = to_explanatory(self.schema, [0, 1, 0, 0, 0, 1, 1, 0, 1])
        np.testing.assert_allclose(vec.likert, [0.5, 2.0])
        np.testing.assert_array_equal(vec.binary, [1, 0, 1])
        self.assertEqual(vec.as_array().shape, (5,))

    def test_validate_record(self):
        self.assertEqual(validate_record(self.schema, [1, 0, 0, 0, 1, 0, 0, 0, 0]), [])
        violations = validate_record(self.schema, [1, 1, 0, 0, 0, 0, 0, 0, 0])
        self.assertEqual([(vv.variable, vv.count) for vv in violations], [("l_1", 2), ("l_2", 0)])

    def test_invalid_vector(self):
        with self.assertRaises(DataValidationError):
            to_explanatory(self.schema, [1, 1, 0, 1, 0, 0, 0, 0, 0])
        with self.assertRaises(SchemaError):
            to_explanatory(self.schema, [1, 0, 0, 1, 0, 0, 0, 0])
        with self.assertRaises(SchemaError):
            to_explanatory(self.schema, [2, 0, 0, 1, 0, 0, 0, 0, 0])


class TestLoadDataset(unittest.TestCase):
    def setUp(self):
        self.schema = small_schema()

    def test_load_csv(self):
        dataset = load_dataset(self.schema, small_data_file)
        self.assertEqual(len(dataset), 4)
        self.assertEqual(dataset.ids, ["P1", "P2", "P3", "P4"])
        self.assertEqual(dataset.trait_matrix.shape, (4, 9))
        np.testing.assert_allclose(dataset.likert_matrix[:, 0], [0, 0.5, 1, 1])
        np.testing.assert_array_equal(dataset.binary_matrix[1], [1, 1, 0])
        self.assertEqual(dataset.active_traits, frozenset(range(1, 10)))

    def test_load_json(self):
        data = {
            "format_version": "1.0",
            "participants": [
                {"id": "A", "set_traits": [1, 4, 7]},
                {"id": "B", "set_traits": [3, 6]},
            ],
        }
        with tempfile.TemporaryDirectory() as tmp:
            path = os.path.join(tmp, "data.json")
            with open(path, "w") as fp:
                json.dump(data, fp)
            dataset = load_dataset(self.schema, path)
        np.testing.assert_array_equal(dataset.trait_matrix[0], [1, 0, 0, 1, 0, 0, 1, 0, 0])
        self.assertEqual(dataset.ids, ["A", "B"])

    def test_headerless_csv(self):
        with tempfile.TemporaryDirectory() as tmp:
            path = os.path.join(tmp, "data.csv")
            with open(path, "w") as fp:
                fp.write("P1,1,0,0,1,0,0,1,0,0\n")
                fp.write("P2,0,1,0,0,1,0,1,1,0\n")
                fp.write("P3,0,0,1,0,0,1,0,0,1\n")
                fp.write("P4,0,0,1,0,0,1,0,0,0\n")
            dataset = load_dataset(self.schema, path)
        self.assertEqual(dataset.ids, ["P1", "P2", "P3", "P4"])
        np.testing.assert_array_equal(dataset.trait_matrix[0], [1, 0, 0, 1, 0, 0, 1, 0, 0])

    def test_hash_in_id(self):
        with tempfile.TemporaryDirectory() as tmp:
            path = os.path.join(tmp, "data.csv")
            with open(path, "w") as fp:
                fp.write("# format_version: 1.0\n")
                fp.write("id,t1,t2,t3,t4,t5,t6,t7,t8,t9\n")
                fp.write("P#1,1,0,0,1,0,0,1,0,0\n")
                fp.write("P2,0,1,0,0,1,0,1,1,0\n")
            dataset = load_dataset(self.schema, path)
        self.assertEqual(dataset.ids, ["P#1", "P2"])

    def test_header_only(self):
        with tempfile.TemporaryDirectory() as tmp:
            path = os.path.join(tmp, "data.csv")
            with open(path, "w") as fp:
                fp.write("id,t1,t2,t3,t4,t5,t6,t7,t8,t9\n")
            dataset = load_dataset(self.schema, path)
        self.assertEqual(len(dataset), 0)

    def test_invalid_records(self):
        with self.assertRaises(DataValidationError) as cm:
            load_dataset(self.schema, invalid_data_file)
        self.assertEqual([dd["id"] for dd in cm.exception.details], ["P2", "P3"])
        dataset = load_dataset(self.schema, invalid_data_file, drop_invalid=True)
        self.assertEqual(dataset.ids, ["P1"])

    def test_duplicate_ids(self):
        matrix = np.array([[1, 0, 0, 1, 0, 0, 0, 0, 0]] * 2)
        with self.assertRaises(DataValidationError):
            Dataset.from_trait_matrix(self.schema, ["A", "A"], matrix)

    def test_wrong_columns(self):
        with tempfile.TemporaryDirectory() as tmp:
            path = os.path.join(tmp, "data.csv")
            with open(path, "w") as fp:
                fp.write("id,t1,t2\nA,1,0\n")
            with self.assertRaises(SchemaError):
                load_dataset(self.schema, path)

    def test_unknown_trait(self):
        with tempfile.TemporaryDirectory() as tmp:
            path = os.path.join(tmp, "data.json")
            with open(path, "w") as fp:
                json.dump([{"id": "A", "set_traits": [1, 4, 10]}], fp)
            with self.assertRaises(SchemaError):
                load_dataset(self.schema, path)

    def test_missing_file(self):
        with self.assertRaises(SchemaError):
            load_dataset(self.schema, "no_such_data.csv")

    def test_write_csv(self):
        dataset = load_dataset(self.schema, small_data_file)
        with tempfile.TemporaryDirectory() as tmp:
            path = os.path.join(tmp, "copy.csv")
            write_dataset_csv(dataset, path)
            again = load_dataset(self.schema, path)
        self.assertEqual(again.ids, dataset.ids)
        np.testing.assert_array_equal(again.trait_matrix, dataset.trait_matrix)

    def test_subset(self):
        dataset = load_dataset(self.schema, small_data_file)
        sub = dataset.subset([2, 0])
        self.assertEqual(sub.ids, ["P3", "P1"])
        np.testing.assert_array_equal(sub.trait_matrix[1], dataset.trait_matrix[0])


class TestMaskTraits(unittest.TestCase):
    def setUp(self):
        self.dataset = load_dataset(small_schema(), small_data_file)

    def test_mask(self):
        masked = mask_traits(self.dataset, [1, 2, 3, 7])
        np.testing.assert_array_equal(masked.trait_matrix[:, 3:6], 0)
        np.testing.assert_array_equal(masked.trait_matrix[:, 7:], 0)
        np.testing.assert_allclose(masked.likert_matrix[:, 1], 0)
        np.testing.assert_allclose(masked.likert_matrix[:, 0], self.dataset.likert_matrix[:, 0])
        self.assertEqual(masked.active_traits, frozenset({1, 2, 3, 7}))

    def test_idempotent(self):
        once = mask_traits(self.dataset, [1, 2, 3, 7, 8])
        twice = mask_traits(once, [1, 2, 3, 7, 8])
        np.testing.assert_array_equal(once.trait_matrix, twice.trait_matrix)
        self.assertEqual(once.active_traits, twice.active_traits)

    def test_unknown_trait(self):
        with self.assertRaises(SchemaError):
            mask_traits(self.dataset, [0, 1])


if __name__ == "__main__":
    unittest.main()
