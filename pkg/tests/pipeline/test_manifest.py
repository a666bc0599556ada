import json
import os
import sys
import tempfile
import unittest
from pathlib import Path

sys.path.insert(0, os.path.abspath(os.path.join(os.path.dirname(__file__), "..")))
__package__ = "pipeline"
from .context import fast_config

from monty.json import MSONable

from ppgen.errors import SchemaError
from ppgen.pipeline.manifest import RunManifest, check_manifest
from ppgen.util import file_sha256


class TestRunManifest(unittest.TestCase):
    def setUp(self):
        self.tmpdir = tempfile.TemporaryDirectory()
        self.root = Path(self.tmpdir.name)
        self.data = self.root / "data.csv"
        self.data.write_text("id,t1\nP1,0\n")
        self.out = self.root / "out"
        self.out.mkdir()
        self.artifact = self.out / "personas.json"
        self.artifact.write_text("{}")
        self.manifest = RunManifest(fast_config().as_dict())
        self.manifest.add_input(self.data)
        self.manifest.add_output(self.artifact)

    def tearDown(self):
        self.tmpdir.cleanup()

    def test_records(self):
        self.assertIsInstance(self.manifest, MSONable)
        self.assertEqual(self.manifest.inputs, {str(self.data): file_sha256(self.data)})
        self.assertEqual(list(self.manifest.outputs), ["personas.json"])
        with self.manifest.stage("noop"):
            pass
        self.assertIn("noop", self.manifest.timings)

    def test_as_dict(self):
        d = self.manifest.as_dict()
        self.assertEqual(d["@class"], "RunManifest")
        self.assertEqual(d["@module"], "ppgen.pipeline.manifest")
        self.assertEqual(d["config"]["boschloo_grid"], 100)

    def test_dump_load(self):
        path = self.out / "manifest.json"
        self.manifest.dump(path)
        with open(path) as fp:
            self.assertEqual(json.load(fp)["@class"], "RunManifest")
        loaded = RunManifest.load(path)
        self.assertIsInstance(loaded, RunManifest)
        self.assertEqual(loaded.config["boschloo_grid"], 100)
        self.assertEqual(loaded.inputs, self.manifest.inputs)
        self.assertEqual(loaded.outputs, self.manifest.outputs)
        self.assertEqual(check_manifest(loaded, self.out), [])

    def test_load_plain_dict(self):
        path = self.root / "plain.json"
        d = self.manifest.as_dict()
        del d["@module"], d["@class"]
        with open(path, "w") as fp:
            json.dump(d, fp)
        loaded = RunManifest.load(path)
        self.assertEqual(loaded.inputs, self.manifest.inputs)

    def test_newer_format(self):
        path = self.root / "newer.json"
        d = self.manifest.as_dict()
        d["format_version"] = "2.0"
        with open(path, "w") as fp:
            json.dump(d, fp)
        with self.assertRaises(SchemaError):
            RunManifest.load(path)

    def test_malformed(self):
        with self.assertRaises(SchemaError):
            RunManifest.from_dict({"format_version": "1.0", "config": {}})
        path = self.root / "list.json"
        path.write_text("[1, 2]")
        with self.assertRaises(SchemaError):
            RunManifest.load(path)

    def test_modified_files(self):
        self.data.write_text("id,t1\nP1,1\n")
        self.artifact.unlink()
        problems = check_manifest(self.manifest, self.out)
        kinds = sorted(pp["kind"] for pp in problems)
        self.assertEqual(kinds, ["missing_output", "modified_input"])


if __name__ == "__main__":
    unittest.main()
