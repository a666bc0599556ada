import json
import os
import sys

sys.path.insert(0, os.path.abspath(os.path.join(os.path.dirname(__file__), "..", "..")))
import ppgen.pipeline.manifest  # noqa: F401
import ppgen.pipeline.run  # noqa: F401
from ppgen.pipeline.run import RunConfig
from ppgen.tools.synthetic import SyntheticDesign, write_synthetic

# fast Boschloo settings for tests
FAST = {"boschloo_grid": 100, "boschloo_refine": False}


def fast_config(**kwargs) -> RunConfig:
    return RunConfig(**{**FAST, **kwargs})


def write_planted(tmpdir: str, seed: int = 0) -> dict:
    """Planted dataset files plus a fast config file, by name."""
    paths = {kk: str(vv) for kk, vv in write_synthetic(SyntheticDesign(), tmpdir, seed).items()}
    paths["config"] = os.path.join(tmpdir, "config.json")
    with open(paths["config"], "w") as fp:
        json.dump({**FAST, "fm_samples": 2}, fp)
    return paths
