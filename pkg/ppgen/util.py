#!/usr/bin/env python
import hashlib
import json
import os
from collections.abc import Iterable
from multiprocessing import Pool
from pathlib import Path
from typing import Callable, TypeVar, Union

from dargs import Argument
from packaging.version import Version

from ppgen import dlog
from ppgen.errors import SchemaError

"""
some common utilities shared by the ppgen sub-packages
"""

# constants define
MaxLength = 70

T = TypeVar("T")
R = TypeVar("R")


def sepline(ch="-", sp="-", screen=False):
    r"""Seperate the output by '-'."""
    if screen:
        print(ch.center(MaxLength, sp))
    else:
        dlog.info(ch.center(MaxLength, sp))


def normalize(arginfo: Argument, data: dict, strict_check: bool = True) -> dict:
    """Normalize and check input data.

    Parameters
    ----------
    arginfo : dargs.Argument
        argument information
    data : dict
        input data
    strict_check : bool, default=True
        strict check data or not

    Returns
    -------
    dict
        normalized data
    """
    data = arginfo.normalize_value(data, trim_pattern="_*")
    arginfo.check_value(data, strict=strict_check)
    return data


def load_file(filename: Union[str, os.PathLike]) -> dict:
    """Load data from a JSON or YAML file.

    Parameters
    ----------
    filename : str or os.PathLike
        The filename to load data from, whose suffix should be .json, .yaml, or .yml

    Returns
    -------
    dict
        The data loaded from the file

    Raises
    ------
    ValueError
        If the file format is not supported
    """
    filename = str(filename)
    if filename.endswith(".json"):
        with open(filename) as fp:
            data = json.load(fp)
    elif filename.endswith(".yaml") or filename.endswith(".yml"):
        from ruamel.yaml import YAML

        yaml = YAML(typ="safe", pure=True)
        with open(filename) as fp:
            data = yaml.load(fp)
    else:
        raise ValueError(f"Unsupported file format: {filename}")
    return data


def check_format_version(found: str, supported: str, what: str):
    """Reject files written by a newer major format version.

    Parameters
    ----------
    found : str
        the ``format_version`` stored in the file
    supported : str
        the newest version this release can read
    what : str
        name of the file kind, used in the message
    """
    try:
        found_v = Version(str(found))
    except Exception as e:
        raise SchemaError(f"{what}: invalid format_version {found!r}") from e
    if found_v.major > Version(supported).major:
        raise SchemaError(
            f"{what}: format_version {found} is newer than the supported {supported}"
        )


def file_sha256(filename: Union[str, os.PathLike]) -> str:
    h = hashlib.sha256()
    with open(filename, "rb") as fp:
        for chunk in iter(lambda: fp.read(1 << 16), b""):
            h.update(chunk)
    return h.hexdigest()


def create_path(path: Union[str, Path]) -> Path:
    """Create an output directory, backing up an existing one as ``path.bkNNN``."""
    path = Path(path)
    if path.is_dir() and any(path.iterdir()):
        counter = 0
        while True:
            bk_dirname = path.with_name(path.name + ".bk%03d" % counter)  # noqa: UP031
            if not bk_dirname.exists():
                path.rename(bk_dirname)
                dlog.info("moved existing %s to %s", path, bk_dirname)
                break
            counter += 1
    path.mkdir(parents=True, exist_ok=True)
    return path


def parallel_map(func: Callable[[T], R], items: Iterable[T], threads: int = 1) -> list[R]:
    """Map ``func`` over ``items``, in a process pool when ``threads > 1``.

    Results keep the input order, so the outcome never depends on the
    number of workers. ``func`` must be picklable (a module-level function
    or a ``functools.partial`` of one) when ``threads > 1``.
    """
    items = list(items)
    if threads <= 1 or len(items) <= 1:
        return [func(ii) for ii in items]
    with Pool(processes=min(threads, len(items))) as pool:
        return pool.map(func, items)
