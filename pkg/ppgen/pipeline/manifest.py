"""Run manifest: what a pipeline run read, how long each stage took, what it wrote.

Inputs and outputs are recorded by SHA-256, so a later ``ppgen verify`` can
detect tampered inputs or artifacts.
"""

import os
import time
from contextlib import contextmanager
from pathlib import Path
from typing import Optional, Union

from monty.json import MSONable
from monty.serialization import dumpfn, loadfn

from ppgen import __version__, dlog
from ppgen.errors import SchemaError
from ppgen.util import check_format_version, file_sha256, sepline

MANIFEST_FORMAT_VERSION = "1.0"
MANIFEST_NAME = "manifest.json"


class RunManifest(MSONable):
    """Record of one run.

    Parameters
    ----------
    config : dict
        run parameters, as given by ``RunConfig.as_dict``
    inputs : dict, optional
        SHA-256 of every input file, keyed by path
    version : str
        ppgen version of the run
    timings : dict, optional
        seconds per stage
    outputs : dict, optional
        SHA-256 of every artifact, keyed by its name in the output directory
    """

    def __init__(
        self,
        config: dict,
        inputs: Optional[dict[str, str]] = None,
        version: str = __version__,
        timings: Optional[dict[str, float]] = None,
        outputs: Optional[dict[str, str]] = None,
    ):
        self.config = config
        self.inputs = {} if inputs is None else inputs
        self.version = version
        self.timings = {} if timings is None else timings
        self.outputs = {} if outputs is None else outputs

    def __repr__(self):
        return (
            f"RunManifest {self.version}: {len(self.inputs)} inputs, "
            f"{len(self.outputs)} outputs"
        )

    def add_input(self, path: Union[str, os.PathLike]):
        self.inputs[str(path)] = file_sha256(path)

    def add_output(self, path: Union[str, os.PathLike]):
        """Record an artifact by its name inside the output directory."""
        self.outputs[Path(path).name] = file_sha256(path)

    @contextmanager
    def stage(self, name: str):
        """Time a pipeline stage and log its boundaries."""
        sepline(name)
        start = time.perf_counter()
        yield
        elapsed = time.perf_counter() - start
        self.timings[name] = elapsed
        dlog.info("%s finished in %.3f s", name, elapsed)

    def as_dict(self) -> dict:
        return {
            "@module": self.__class__.__module__,
            "@class": self.__class__.__name__,
            "format_version": MANIFEST_FORMAT_VERSION,
            "version": self.version,
            "config": self.config,
            "inputs": self.inputs,
            "timings": self.timings,
            "outputs": self.outputs,
        }

    @classmethod
    def from_dict(cls, d: dict) -> "RunManifest":
        check_format_version(
            d.get("format_version", MANIFEST_FORMAT_VERSION),
            MANIFEST_FORMAT_VERSION,
            "manifest",
        )
        try:
            return cls(
                config=dict(d["config"]),
                inputs=dict(d["inputs"]),
                version=str(d.get("version", "unknown")),
                timings=dict(d.get("timings", {})),
                outputs=dict(d.get("outputs", {})),
            )
        except (KeyError, TypeError, ValueError) as e:
            raise SchemaError("malformed manifest") from e

    def dump(self, path: Union[str, os.PathLike]):
        dumpfn(self, str(path), indent=2)

    @classmethod
    def load(cls, path: Union[str, os.PathLike]) -> "RunManifest":
        data = loadfn(str(path))
        if isinstance(data, cls):
            return data
        if not isinstance(data, dict):
            raise SchemaError(f"malformed manifest {path}")
        return cls.from_dict(data)


def check_manifest(manifest: RunManifest, output_dir: Union[str, os.PathLike]) -> list[dict]:
    """Compare recorded hashes with the files on disk.

    Returns
    -------
    list of dict
        one entry per missing or modified input or output
    """
    output_dir = Path(output_dir)
    problems = []
    files = [("input", Path(pp), hh) for pp, hh in manifest.inputs.items()]
    files += [("output", output_dir / name, hh) for name, hh in manifest.outputs.items()]
    for kind, path, expected in files:
        if not path.is_file():
            problems.append({"kind": f"missing_{kind}", "path": str(path)})
        elif file_sha256(path) != expected:
            problems.append({"kind": f"modified_{kind}", "path": str(path)})
    return problems
