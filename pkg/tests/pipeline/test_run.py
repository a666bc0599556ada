import os
import sys
import tempfile
import unittest
from pathlib import Path

import numpy as np
from sklearn.metrics import adjusted_rand_score

sys.path.insert(0, os.path.abspath(os.path.join(os.path.dirname(__file__), "..")))
__package__ = "pipeline"
from .context import fast_config

from ppgen.errors import DegenerateInputError
from ppgen.persona.prune import verify_personas
from ppgen.pipeline.manifest import RunManifest
from ppgen.pipeline.run import export_pipeline, masked_distances, r_max_limit, run_pipeline
from ppgen.tools.synthetic import SyntheticDesign, generate


class TestPlanted(unittest.TestCase):
    @classmethod
    def setUpClass(cls):
        cls.design = SyntheticDesign()
        cls.dataset, cls.labels = generate(cls.design, seed=0)
        cls.config = fast_config()
        cls.result = run_pipeline(cls.config, cls.dataset)

    def test_personas(self):
        personas = self.result.personas
        self.assertEqual(len(personas), 8)
        self.assertEqual(adjusted_rand_score(self.labels, personas.labels(len(self.dataset))), 1.0)
        self.assertEqual(
            sorted(ll.size for ll in personas.leaves), sorted(self.design.sizes)
        )

    def test_selection(self):
        retained = self.result.selection.retained
        # the Likert corners are closed questions
        self.assertTrue(set(range(1, 10)) <= retained)
        markers = range(10, 10 + self.design.archetypes * self.design.unique_traits)
        self.assertTrue(set(markers) <= retained)
        self.assertEqual(self.result.masked.keep, retained)

    def test_trees(self):
        result = self.result
        self.assertEqual(result.final.leaf_count, len(self.dataset))
        self.assertEqual(result.step1.leaf_count, 8)
        self.assertLessEqual(result.initial.leaf_count, self.config.selection_levels)

    def test_evidence(self):
        personas = self.result.personas
        self.assertEqual(len(personas.pairwise_reports), 28)
        self.assertTrue(all(rr.significant for rr in personas.pairwise_reports.values()))
        self.assertTrue(all(cc.passes for cc in personas.ci_overlap.values()))
        self.assertEqual(personas.family_size, self.result.selection.S)

    def test_verify(self):
        personas = self.result.personas
        violations = verify_personas(
            [ll.members for ll in personas.leaves],
            self.dataset,
            personas.traits,
            personas.alpha,
            personas.family_size,
            grid=self.config.boschloo_grid,
            refine=self.config.boschloo_refine,
        )
        self.assertEqual(violations, [])

    def test_r_max_limit(self):
        # smallest archetype has 11 participants
        self.assertEqual(r_max_limit(self.result.personas), 6)

    def test_reuse_selection(self):
        again = run_pipeline(self.config, self.dataset, selection=self.result.selection)
        self.assertIsNone(again.initial)
        self.assertEqual(again.personas.ids, self.result.personas.ids)

    def test_export(self):
        outputs = []
        with tempfile.TemporaryDirectory() as tmpdir:
            for name in ("a", "b"):
                out = Path(tmpdir) / name
                out.mkdir()
                config = fast_config(output_dir=str(out), distance_cache=True)
                manifest = RunManifest(config.as_dict())
                result = run_pipeline(config, self.dataset, manifest)
                written = export_pipeline(result, config, out, manifest)
                self.assertTrue(all(pp.is_file() for pp in written))
                self.assertTrue((out / "manifest.json").is_file())
                self.assertIn("final dendrogram", manifest.timings)
                outputs.append(
                    {
                        pp.name: pp.read_bytes()
                        for pp in written
                        if pp.suffix != ".h5"
                    }
                )
        # identical inputs give identical artifacts
        self.assertEqual(outputs[0], outputs[1])
        self.assertIn("personas.json", outputs[0])
        self.assertIn("report.md", outputs[0])


class TestPlantedSeeds(unittest.TestCase):
    def test_recovery_rate(self):
        design = SyntheticDesign()
        config = fast_config()
        recovered = []
        for seed in range(20):
            dataset, labels = generate(design, seed=seed)
            personas = run_pipeline(config, dataset).personas
            ari = adjusted_rand_score(labels, personas.labels(len(dataset)))
            if len(personas) == design.archetypes and ari >= 0.9:
                recovered.append(seed)
        self.assertGreaterEqual(len(recovered), 18, f"recovered seeds: {recovered}")


class TestMethodOptions(unittest.TestCase):
    @classmethod
    def setUpClass(cls):
        cls.dataset, cls.labels = generate(SyntheticDesign(), seed=2)

    def test_depth_levels(self):
        config = fast_config(level_semantics="depth", selection_levels=4)
        result = run_pipeline(config, self.dataset)
        # the initial tree is grown to singletons
        self.assertEqual(result.initial.leaf_count, len(self.dataset))
        self.assertEqual(result.selection.examined_levels, 4)
        self.assertTrue(all(rr.significant for rr in result.personas.pairwise_reports.values()))

    def test_bonferroni(self):
        result = run_pipeline(fast_config(correction="bonferroni"), self.dataset)
        personas = result.personas
        self.assertEqual(personas.correction, "bonferroni")
        self.assertEqual(len(personas), 8)
        self.assertEqual(adjusted_rand_score(self.labels, personas.labels(len(self.dataset))), 1.0)


class TestDegenerate(unittest.TestCase):
    def setUp(self):
        self.dataset, self.labels = generate(SyntheticDesign(), seed=1)

    def test_single_participant(self):
        with self.assertLogs("ppgen", level="WARNING"):
            result = run_pipeline(fast_config(), self.dataset.subset([0]))
        self.assertEqual(len(result.personas), 1)
        self.assertEqual(result.personas.ids, ["1.1"])
        self.assertEqual(result.final_dm.values.shape, (1, 1))

    def test_no_binary_trait(self):
        # one archetype: nothing discriminates its members
        members = np.flatnonzero(self.labels == 0)
        with self.assertRaises(DegenerateInputError):
            run_pipeline(fast_config(), self.dataset.subset(members))

    def test_masked_distances(self):
        dm = masked_distances(self.dataset.subset([3]))
        self.assertEqual(dm.values.tolist(), [[0.0]])
