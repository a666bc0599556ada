import os
import sys
import tempfile
import unittest

import numpy as np

sys.path.insert(0, os.path.abspath(os.path.join(os.path.dirname(__file__), "..")))
__package__ = "persona"
from .context import GRID, REFINE, group_dataset, group_dendrogram

from ppgen.errors import SchemaError
from ppgen.features.schema import VariableDef, VariableSchema
from ppgen.persona.selection import (
    load_selection,
    retained_traits,
    save_selection,
    select_discriminative,
)


def open_schema() -> VariableSchema:
    return VariableSchema(
        (
            VariableDef("l_1", "likert", (1, 2, 3), (0, 1), source="closed_question"),
            VariableDef("l_2", "likert", (4, 5, 6), (0, 2), source="open_question"),
            VariableDef("l_3", "likert", (7, 8), (0, 1), source="composite"),
            VariableDef("b_1", "binary", (9,)),
            VariableDef("b_2", "binary", (10,)),
        ),
        10,
    )


class TestRetainedTraits(unittest.TestCase):
    def setUp(self):
        self.schema = open_schema()

    def test_rules(self):
        min_p = np.ones(10)
        min_p[4] = 1e-4  # t5, open Likert level
        min_p[9] = 5e-4  # t10
        min_p[8] = 0.002  # t9, above threshold
        keep = retained_traits(self.schema, min_p, 0.001)
        self.assertEqual(keep, frozenset({1, 2, 3, 4, 5, 6, 7, 8, 10}))

    def test_open_likert_dropped(self):
        keep = retained_traits(self.schema, np.ones(10), 0.001)
        self.assertEqual(keep, frozenset({1, 2, 3, 7, 8}))

    def test_threshold_one(self):
        keep = retained_traits(self.schema, np.ones(10), 1.0)
        self.assertEqual(keep, frozenset(range(1, 11)))


class TestSelectDiscriminative(unittest.TestCase):
    def setUp(self):
        self.dataset = group_dataset()
        self.dendrogram = group_dendrogram(self.dataset)

    def test_select(self):
        report = select_discriminative(
            self.dendrogram, self.dataset, levels=3, grid=GRID, refine=REFINE
        )
        # (X, Y) at the second cut, then (X1, X2), (X1, Y), (X2, Y)
        self.assertEqual(report.comparisons, 4)
        self.assertEqual(report.examined_levels, 3)
        self.assertEqual(report.retained, frozenset(range(1, 7)))
        self.assertEqual(report.S, 6)
        self.assertLess(report.min_p[4], 0.001)
        self.assertEqual(report.min_p[1], 1.0)

    def test_single_level(self):
        report = select_discriminative(
            self.dendrogram, self.dataset, levels=1, grid=GRID, refine=REFINE
        )
        self.assertEqual(report.comparisons, 0)
        # the closed-question Likert variable only
        self.assertEqual(report.retained, frozenset({1, 2, 3}))

    def test_shallow_dendrogram(self):
        with self.assertLogs("ppgen", level="WARNING"):
            report = select_discriminative(
                self.dendrogram, self.dataset, levels=15, grid=GRID, refine=REFINE
            )
        self.assertEqual(report.examined_levels, 5)

    def test_depth_levels(self):
        report = select_discriminative(
            self.dendrogram,
            self.dataset,
            levels=3,
            grid=GRID,
            refine=REFINE,
            level_semantics="depth",
        )
        # (X, Y) at depth 1, then every pair of X1, X2, Y1, Y2 at depth 2
        self.assertEqual(report.comparisons, 7)
        self.assertEqual(report.retained, frozenset(range(1, 7)))
        with self.assertLogs("ppgen", level="WARNING"):
            report = select_discriminative(
                self.dendrogram,
                self.dataset,
                levels=15,
                grid=GRID,
                refine=REFINE,
                level_semantics="depth",
            )
        self.assertEqual(report.examined_levels, 4)

    def test_invalid(self):
        with self.assertRaises(ValueError):
            select_discriminative(self.dendrogram, self.dataset, threshold=0.0)
        with self.assertRaises(ValueError):
            select_discriminative(self.dendrogram, self.dataset, levels=0)

    def test_file(self):
        report = select_discriminative(
            self.dendrogram, self.dataset, levels=3, grid=GRID, refine=REFINE
        )
        with tempfile.TemporaryDirectory() as tmpdir:
            path = os.path.join(tmpdir, "selection.json")
            save_selection(report, path)
            loaded = load_selection(path)
            with open(path, "w") as fp:
                fp.write('{"format_version": "1.0", "retained": [1]}')
            with self.assertRaises(SchemaError):
                load_selection(path)
        self.assertEqual(loaded.retained, report.retained)
        self.assertEqual(loaded.comparisons, 4)
        np.testing.assert_allclose(loaded.min_p, report.min_p)
