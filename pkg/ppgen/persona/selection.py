"""Discriminative trait selection on the initial dendrogram.

Every pair of clusters within each of the first cuts of the dendrogram is
compared trait by trait with Boschloo's test. A trait is discriminative when
its smallest raw p-value is below the threshold. The retained set follows the
variable structure:

* binary traits are kept one by one;
* Likert variables coded from open questions are kept whole as soon as one
  of their levels is discriminative;
* closed-question and composite Likert variables are always kept.
"""

import os
from dataclasses import dataclass
from functools import partial
from itertools import combinations
from typing import Union

import numpy as np
from monty.serialization import dumpfn, loadfn

from ppgen import dlog
from ppgen.cluster.diana import Dendrogram, cut_level, max_level
from ppgen.errors import SchemaError
from ppgen.features.dataset import Dataset
from ppgen.features.schema import VariableSchema
from ppgen.persona.compare import trait_counts, trait_pvalues
from ppgen.stats.exact import DEFAULT_GRID
from ppgen.util import check_format_version, parallel_map

DEFAULT_LEVELS = 15
DEFAULT_THRESHOLD = 0.001
SELECTION_FORMAT_VERSION = "1.0"


@dataclass(frozen=True)
class SelectionReport:
    """Smallest p-value of every trait and the retained trait set."""

    min_p: np.ndarray
    retained: frozenset[int]
    examined_levels: int
    threshold: float
    comparisons: int

    @property
    def S(self) -> int:
        return len(self.retained)

    def as_dict(self) -> dict:
        return {
            "threshold": self.threshold,
            "examined_levels": self.examined_levels,
            "comparisons": self.comparisons,
            "S": self.S,
            "retained": sorted(self.retained),
            "min_p": {str(ii + 1): float(pp) for ii, pp in enumerate(self.min_p)},
        }


def retained_traits(schema: VariableSchema, min_p: np.ndarray, threshold: float) -> frozenset[int]:
    """Map per-trait minimum p-values to the retained trait set.

    A threshold of 1 keeps every trait.
    """
    if threshold >= 1.0:
        return frozenset(range(1, schema.trait_count + 1))
    significant = {ii + 1 for ii in np.flatnonzero(np.asarray(min_p) < threshold)}
    keep = set()
    for var in schema.variables:
        if var.is_likert and var.source != "open_question":
            keep.update(var.trait_levels)
        elif any(tt in significant for tt in var.trait_levels):
            keep.update(var.trait_levels)
    return frozenset(keep)


def _pair_pvalues(pair, traits, grid, refine) -> list[float]:
    a, b = pair
    return trait_pvalues(
        trait_counts(a, traits), a.size, trait_counts(b, traits), b.size, grid, refine
    )


def select_discriminative(
    dendrogram: Dendrogram,
    dataset: Dataset,
    levels: int = DEFAULT_LEVELS,
    threshold: float = DEFAULT_THRESHOLD,
    grid: int = DEFAULT_GRID,
    refine: bool = True,
    threads: int = 1,
    level_semantics: str = "split-order",
) -> SelectionReport:
    """Select the discriminative traits.

    Parameters
    ----------
    dendrogram : Dendrogram
        initial dendrogram over all traits
    dataset : Dataset
        the clustered dataset, for its schema
    levels : int
        number of cuts examined (``v = 1..levels``)
    threshold : float
        raw, uncorrected p-value threshold
    grid : int
        Boschloo nuisance grid
    refine : bool
        refine the Boschloo grid maximum
    threads : int
        worker processes
    level_semantics : str
        ``split-order`` cuts after ``v - 1`` splits, ``depth`` cuts at tree
        depth ``v - 1``

    Returns
    -------
    SelectionReport
        per-trait minimum p-values and the retained traits
    """
    if not 0 < threshold <= 1:
        raise ValueError(f"threshold must lie in (0, 1], got {threshold}")
    if levels < 1:
        raise ValueError(f"levels must be positive, got {levels}")
    available = max_level(dendrogram, level_semantics)
    if available < levels:
        dlog.warning(
            "dendrogram has only %d levels, selection examines %d instead of %d",
            available,
            available,
            levels,
        )
        levels = available
    schema = dataset.schema
    traits = tuple(range(1, schema.trait_count + 1))
    pairs = {}
    for v in range(2, levels + 1):
        for a, b in combinations(cut_level(dendrogram, v, level_semantics), 2):
            pairs.setdefault((a.id, b.id), (a, b))
    min_p = np.ones(schema.trait_count)
    if pairs:
        func = partial(_pair_pvalues, traits=traits, grid=grid, refine=refine)
        results = parallel_map(func, list(pairs.values()), threads)
        for p_values in results:
            np.minimum(min_p, p_values, out=min_p)
    retained = retained_traits(schema, min_p, threshold)
    dlog.info(
        "selection: %d comparisons over %d levels, %d of %d traits retained",
        len(pairs),
        levels,
        len(retained),
        schema.trait_count,
    )
    return SelectionReport(min_p, retained, levels, threshold, len(pairs))


def save_selection(report: SelectionReport, path: Union[str, os.PathLike]):
    dumpfn({"format_version": SELECTION_FORMAT_VERSION, **report.as_dict()}, str(path), indent=2)


def load_selection(path: Union[str, os.PathLike]) -> SelectionReport:
    data = loadfn(str(path))
    check_format_version(
        data.get("format_version", SELECTION_FORMAT_VERSION), SELECTION_FORMAT_VERSION, "selection"
    )
    try:
        min_p = np.ones(len(data["min_p"]))
        for kk, pp in data["min_p"].items():
            min_p[int(kk) - 1] = float(pp)
        return SelectionReport(
            min_p,
            frozenset(int(tt) for tt in data["retained"]),
            int(data["examined_levels"]),
            float(data["threshold"]),
            int(data["comparisons"]),
        )
    except (KeyError, TypeError, IndexError, ValueError) as e:
        raise SchemaError(f"malformed selection file {path}") from e
