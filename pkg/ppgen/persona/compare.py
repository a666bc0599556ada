"""Trait-by-trait comparison of two clusters."""

from collections.abc import Iterable, Sequence
from dataclasses import dataclass
from functools import partial
from itertools import combinations
from typing import Optional

import numpy as np

from ppgen import dlog
from ppgen.cluster.diana import ClusterNode
from ppgen.stats.correction import HolmDecision, correct
from ppgen.stats.exact import DEFAULT_GRID, boschloo
from ppgen.util import parallel_map


@dataclass(frozen=True)
class TestReport:
    """Boschloo p-values of one cluster pair with the corrected decision over the family."""

    a: tuple[int, int]
    b: tuple[int, int]
    traits: tuple[int, ...]
    p_values: tuple[float, ...]
    decision: HolmDecision

    @property
    def rejected_traits(self) -> tuple[int, ...]:
        return tuple(tt for tt, rr in zip(self.traits, self.decision.rejected) if rr)

    @property
    def significant(self) -> bool:
        return self.decision.any_rejected

    @property
    def min_p(self) -> float:
        return min(self.p_values, default=1.0)

    def as_dict(self) -> dict:
        return {
            "a": f"{self.a[0]}.{self.a[1]}",
            "b": f"{self.b[0]}.{self.b[1]}",
            "rejected_traits": list(self.rejected_traits),
            "min_p": self.min_p,
            "family_size": self.decision.m,
            "alpha": self.decision.alpha,
            "correction": self.decision.method,
        }


def trait_counts(node: ClusterNode, traits: Sequence[int]) -> np.ndarray:
    """Number of members having each trait, from the node descriptor."""
    cols = np.asarray(traits, dtype=int) - 1
    return np.rint(node.descriptor[cols] * node.size).astype(int)


def trait_pvalues(
    counts_a: Sequence[int],
    size_a: int,
    counts_b: Sequence[int],
    size_b: int,
    grid: int = DEFAULT_GRID,
    refine: bool = True,
) -> list[float]:
    return [
        boschloo((int(ca), size_a, int(cb), size_b), grid=grid, refine=refine).p_boschloo
        for ca, cb in zip(counts_a, counts_b)
    ]


def compare_clusters(
    a: ClusterNode,
    b: ClusterNode,
    traits: Iterable[int],
    alpha: float = 0.05,
    family_size: Optional[int] = None,
    grid: int = DEFAULT_GRID,
    refine: bool = True,
    correction: str = "holm",
) -> TestReport:
    """Test every trait for a different frequency between two clusters.

    Parameters
    ----------
    a, b : ClusterNode
        disjoint clusters
    traits : iterable of int
        trait indices tested
    alpha : float
        family-wise error rate of the correction
    family_size : int, optional
        family size, defaults to the number of traits
    grid : int
        Boschloo nuisance grid
    refine : bool
        refine the Boschloo grid maximum
    correction : str
        ``holm`` or ``bonferroni``

    Returns
    -------
    TestReport
        the clusters are significantly different iff a trait is rejected
    """
    traits = tuple(sorted(int(tt) for tt in traits))
    p_values = trait_pvalues(
        trait_counts(a, traits), a.size, trait_counts(b, traits), b.size, grid, refine
    )
    decision = correct(p_values, alpha, family_size, correction)
    report = TestReport(a.id, b.id, traits, tuple(p_values), decision)
    dlog.debug(
        "compare %s (%d) vs %s (%d): %d rejected, min p %.3g",
        a.label,
        a.size,
        b.label,
        b.size,
        decision.n_rejected,
        report.min_p,
    )
    return report


def _compare_pair(pair, traits, alpha, family_size, grid, refine, correction) -> TestReport:
    return compare_clusters(pair[0], pair[1], traits, alpha, family_size, grid, refine, correction)


def compare_pairs(
    pairs: Sequence[tuple[ClusterNode, ClusterNode]],
    traits: Iterable[int],
    alpha: float = 0.05,
    family_size: Optional[int] = None,
    grid: int = DEFAULT_GRID,
    refine: bool = True,
    threads: int = 1,
    correction: str = "holm",
) -> list[TestReport]:
    """Reports for the given cluster pairs, in order."""
    func = partial(
        _compare_pair,
        traits=tuple(traits),
        alpha=alpha,
        family_size=family_size,
        grid=grid,
        refine=refine,
        correction=correction,
    )
    return parallel_map(func, list(pairs), threads)


def compare_all_pairs(
    nodes: Sequence[ClusterNode],
    traits: Iterable[int],
    alpha: float = 0.05,
    family_size: Optional[int] = None,
    grid: int = DEFAULT_GRID,
    refine: bool = True,
    threads: int = 1,
    correction: str = "holm",
) -> dict[tuple[int, int], TestReport]:
    """Reports for every unordered pair, keyed by positions in ``nodes``."""
    keys = list(combinations(range(len(nodes)), 2))
    reports = compare_pairs(
        [(nodes[ii], nodes[jj]) for ii, jj in keys],
        traits,
        alpha,
        family_size,
        grid,
        refine,
        threads,
        correction,
    )
    return dict(zip(keys, reports))
