"""Sensitivity of the dendrogram to removed participants.

For every removal count ``r`` the dendrogram is rebuilt on random subsets of
``n - r`` participants. At each level ``v`` the cut of the subset tree is
compared with the cut of the full tree restricted to the surviving
participants, using the Fowlkes-Mallows index.

Subsets are drawn from ``SeedSequence(seed, spawn_key=(r, sample))``, so
every sample is reproducible on its own and the report does not depend on
the number of worker processes.
"""

import os
from collections.abc import Sequence
from dataclasses import dataclass
from functools import partial
from typing import Optional, Union

import numpy as np
import pandas as pd
from sklearn.metrics import fowlkes_mallows_score

from ppgen import dlog
from ppgen.cluster.diana import build_dendrogram, labels_at_level, split_budget
from ppgen.distance.measure import DistanceMatrix
from ppgen.features.dataset import Dataset
from ppgen.util import parallel_map

FM_LOW = 0.6


def _has_pair(labels: np.ndarray) -> bool:
    _, counts = np.unique(labels, return_counts=True)
    return bool(np.any(counts > 1))


def fowlkes_mallows(labels_a, labels_b) -> float:
    """Fowlkes-Mallows index ``TP / sqrt((TP + FP) (TP + FN))`` over point pairs.

    Returns 0 when no pair is co-clustered in both labelings, except that two
    labelings without any co-clustered pair have identical pair sets and
    score 1.

    Raises
    ------
    ValueError
        if the labelings differ in length
    """
    labels_a = np.asarray(labels_a)
    labels_b = np.asarray(labels_b)
    if labels_a.shape != labels_b.shape or labels_a.ndim != 1:
        raise ValueError(
            f"labelings differ in length: {labels_a.shape} vs {labels_b.shape}"
        )
    if not _has_pair(labels_a) and not _has_pair(labels_b):
        return 1.0
    return float(fowlkes_mallows_score(labels_a, labels_b))


@dataclass(frozen=True, eq=False)
class FMReport:
    """Mean Fowlkes-Mallows index per removal count (rows) and level (columns).

    ``distributions`` holds every sample, shape ``(len(r_values), samples,
    len(levels))``, when requested.
    """

    r_values: tuple[int, ...]
    levels: tuple[int, ...]
    samples: int
    mean_fm: np.ndarray
    seed: int
    distributions: Optional[np.ndarray] = None

    def to_frame(self) -> pd.DataFrame:
        rows = [
            (r, v, float(self.mean_fm[ii, jj]))
            for ii, r in enumerate(self.r_values)
            for jj, v in enumerate(self.levels)
        ]
        return pd.DataFrame(rows, columns=["r", "v", "mean_fm"])

    def samples_frame(self) -> pd.DataFrame:
        if self.distributions is None:
            raise ValueError("the report was built without sample distributions")
        rows = [
            (r, v, ss, float(self.distributions[ii, ss, jj]))
            for ii, r in enumerate(self.r_values)
            for ss in range(self.samples)
            for jj, v in enumerate(self.levels)
        ]
        return pd.DataFrame(rows, columns=["r", "v", "sample", "fm"])

    def write_csv(self, path: Union[str, os.PathLike]):
        self.to_frame().to_csv(path, index=False, float_format="%.17g")

    def write_samples_csv(self, path: Union[str, os.PathLike]):
        self.samples_frame().to_csv(path, index=False, float_format="%.17g")

    def low_levels(self, threshold: float = FM_LOW) -> list[tuple[int, int]]:
        """``(r, v)`` cells whose mean index is below ``threshold``."""
        return [
            (r, v)
            for ii, r in enumerate(self.r_values)
            for jj, v in enumerate(self.levels)
            if self.mean_fm[ii, jj] < threshold
        ]

    def warn_low_levels(self, threshold: float = FM_LOW):
        """Warn once per level whose mean index is below ``threshold`` for some ``r``."""
        low = self.low_levels(threshold)
        for v in sorted({vv for _, vv in low}):
            dlog.warning(
                "mean Fowlkes-Mallows index below %.1f at v=%d for r in %s",
                threshold,
                v,
                [rr for rr, vv in low if vv == v],
            )


def subset_indices(n: int, r: int, sample: int, seed: int) -> np.ndarray:
    """Sorted indices of the ``n - r`` participants kept in one sample."""
    rng = np.random.default_rng(np.random.SeedSequence(seed, spawn_key=(r, sample)))
    return np.sort(rng.choice(n, size=n - r, replace=False))


def _fm_sample(
    task: tuple[int, int],
    dataset: Dataset,
    values: np.ndarray,
    full_labels: np.ndarray,
    levels: tuple[int, ...],
    seed: int,
    split_rule: str,
    level_semantics: str,
) -> list[float]:
    r, sample = task
    keep = subset_indices(len(dataset), r, sample, seed)
    sub_tree = build_dendrogram(
        dataset.subset(keep),
        values[np.ix_(keep, keep)],
        max_depth=split_budget(max(levels), level_semantics),
        split_rule=split_rule,
    )
    return [
        fowlkes_mallows(full_labels[jj][keep], labels_at_level(sub_tree, v, level_semantics))
        for jj, v in enumerate(levels)
    ]


def sensitivity_analysis(
    dataset: Dataset,
    dm: Union[DistanceMatrix, np.ndarray],
    r_values: Sequence[int],
    levels: Sequence[int],
    samples: int = 500,
    seed: int = 0,
    split_rule: str = "diameter",
    keep_samples: bool = False,
    threads: int = 1,
    level_semantics: str = "split-order",
) -> FMReport:
    """Fowlkes-Mallows sensitivity of the dendrogram cuts.

    Parameters
    ----------
    dataset : Dataset
        clustered participants
    dm : DistanceMatrix or np.ndarray
        their distances, as used for the full dendrogram
    r_values : sequence of int
        numbers of removed participants; ``0`` compares the tree with itself
    levels : sequence of int
        cut sizes ``v`` compared
    samples : int
        random subsets per removal count
    seed : int
        root seed
    split_rule : str
        split rule of the rebuilt dendrograms
    keep_samples : bool
        also return every sample
    threads : int
        worker processes
    level_semantics : str
        ``split-order`` or ``depth`` cuts, as in trait selection

    Returns
    -------
    FMReport
        mean index per ``(r, v)``
    """
    n = len(dataset)
    r_values = tuple(int(rr) for rr in r_values)
    levels = tuple(int(vv) for vv in levels)
    if samples < 1:
        raise ValueError(f"samples must be positive, got {samples}")
    if not r_values or not levels:
        raise ValueError("r_values and levels must not be empty")
    if min(r_values) < 0 or max(r_values) >= n:
        raise ValueError(f"removal counts must lie in 0..{n - 1}")
    if min(levels) < 1:
        raise ValueError(f"levels must be positive, got {min(levels)}")
    if level_semantics == "split-order" and max(levels) > n - max(r_values):
        raise ValueError(
            f"levels must lie in 1..{n - max(r_values)} for {n} participants "
            f"and up to {max(r_values)} removed"
        )
    values = dm.values if isinstance(dm, DistanceMatrix) else np.asarray(dm, dtype=float)
    full_tree = build_dendrogram(
        dataset,
        values,
        max_depth=split_budget(max(levels), level_semantics),
        split_rule=split_rule,
    )
    full_labels = tuple(labels_at_level(full_tree, v, level_semantics) for v in levels)
    tasks = [(r, ss) for r in r_values for ss in range(samples)]
    func = partial(
        _fm_sample,
        dataset=dataset,
        values=values,
        full_labels=full_labels,
        levels=levels,
        seed=seed,
        split_rule=split_rule,
        level_semantics=level_semantics,
    )
    results = np.asarray(parallel_map(func, tasks, threads), dtype=float)
    distributions = results.reshape(len(r_values), samples, len(levels))
    mean_fm = distributions.mean(axis=1)
    dlog.info(
        "sensitivity: %d removal counts x %d samples x %d levels",
        len(r_values),
        samples,
        len(levels),
    )
    return FMReport(
        r_values,
        levels,
        samples,
        mean_fm,
        seed,
        distributions if keep_samples else None,
    )
