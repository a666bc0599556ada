"""Two-step significance pruning of the final dendrogram into personas.

Step 1 walks the tree from the root and keeps a split only when the two
children differ significantly on at least one discriminative trait; the
subtree below a rejected split is discarded. Step 2 repeatedly compares all
leaves pairwise and collapses the parent of the leaf with the most
insignificant comparisons, until every pair of leaves differs.
"""

from collections.abc import Iterable, Sequence
from dataclasses import dataclass
from itertools import combinations
from typing import Optional

import numpy as np

from ppgen import dlog
from ppgen.cluster.diana import ClusterNode, Dendrogram
from ppgen.errors import DegenerateInputError
from ppgen.features.dataset import Dataset
from ppgen.persona.compare import TestReport, compare_clusters, compare_pairs, trait_counts
from ppgen.stats.correction import correct
from ppgen.stats.exact import DEFAULT_GRID, boschloo
from ppgen.stats.interval import agresti_interval, intervals_overlap


@dataclass(frozen=True)
class CIOverlap:
    """Per-trait interval comparison of one persona pair."""

    a: tuple[int, int]
    b: tuple[int, int]
    traits: tuple[int, ...]
    non_overlapping: tuple[bool, ...]

    @property
    def passes(self) -> bool:
        return any(self.non_overlapping)

    @property
    def separating_traits(self) -> tuple[int, ...]:
        return tuple(tt for tt, ff in zip(self.traits, self.non_overlapping) if ff)

    def as_dict(self) -> dict:
        return {
            "a": f"{self.a[0]}.{self.a[1]}",
            "b": f"{self.b[0]}.{self.b[1]}",
            "non_overlapping_traits": list(self.separating_traits),
            "passes": self.passes,
        }


class PersonaSet:
    """Leaves of the pruned dendrogram with their pairwise evidence.

    Parameters
    ----------
    leaves : list of ClusterNode
        the personas
    traits : tuple of int
        discriminative traits they were tested on
    alpha : float
        family-wise error rate
    family_size : int
        correction family size
    pairwise_reports : dict, optional
        test reports keyed by positions ``(i, j)``, ``i < j``, in ``leaves``
    ci_overlap : dict, optional
        interval comparisons, keyed like ``pairwise_reports``
    dendrogram : Dendrogram, optional
        the pruned tree
    correction : str
        ``holm`` or ``bonferroni``
    """

    def __init__(
        self,
        leaves: list[ClusterNode],
        traits: tuple[int, ...],
        alpha: float,
        family_size: int,
        pairwise_reports: Optional[dict[tuple[int, int], TestReport]] = None,
        ci_overlap: Optional[dict[tuple[int, int], CIOverlap]] = None,
        dendrogram: Optional[Dendrogram] = None,
        correction: str = "holm",
    ):
        self.leaves = leaves
        self.traits = tuple(traits)
        self.alpha = alpha
        self.family_size = family_size
        self.pairwise_reports = {} if pairwise_reports is None else pairwise_reports
        self.ci_overlap = {} if ci_overlap is None else ci_overlap
        self.dendrogram = dendrogram
        self.correction = correction

    def __repr__(self):
        return f"PersonaSet: {len(self.leaves)} personas on {len(self.traits)} traits"

    def __len__(self) -> int:
        return len(self.leaves)

    @property
    def ids(self) -> list[str]:
        return [ll.persona_id for ll in self.leaves]

    def labels(self, n: int) -> np.ndarray:
        """Persona position of every participant."""
        labels = np.full(n, -1, dtype=int)
        for ii, ll in enumerate(self.leaves):
            labels[list(ll.members)] = ii
        return labels


def _copy_tree(node: ClusterNode) -> ClusterNode:
    return ClusterNode(
        node.id,
        node.members,
        node.descriptor,
        [_copy_tree(cc) for cc in node.children],
        node.split_order,
    )


def _collapse(node: ClusterNode):
    node.children = []
    node.split_order = -1


def _with_root(dendrogram: Dendrogram, root: ClusterNode) -> Dendrogram:
    splits = sorted(
        (nn for nn in root.walk() if not nn.is_leaf), key=lambda nn: nn.split_order
    )
    split_log = [(nn.id, (nn.children[0].id, nn.children[1].id)) for nn in splits]
    return Dendrogram(root, split_log, dendrogram.rng_seed, dendrogram.split_rule)


def prune_step1(
    dendrogram: Dendrogram,
    traits: Iterable[int],
    alpha: float = 0.05,
    family_size: Optional[int] = None,
    grid: int = DEFAULT_GRID,
    refine: bool = True,
    correction: str = "holm",
) -> Dendrogram:
    """Keep a split iff its two children are significantly different.

    Parameters
    ----------
    dendrogram : Dendrogram
        final dendrogram built on the discriminative traits
    traits : iterable of int
        discriminative traits tested
    alpha : float
        family-wise error rate
    family_size : int, optional
        correction family size, defaults to the number of traits
    grid : int
        Boschloo nuisance grid
    refine : bool
        refine the Boschloo grid maximum
    correction : str
        ``holm`` or ``bonferroni``

    Returns
    -------
    Dendrogram
        a pruned copy; the input is not modified
    """
    traits = tuple(traits)
    root = _copy_tree(dendrogram.root)
    stack = [root]
    while stack:
        node = stack.pop()
        if node.is_leaf:
            continue
        report = compare_clusters(
            node.children[0], node.children[1], traits, alpha, family_size, grid, refine, correction
        )
        if report.significant:
            stack.extend(reversed(node.children))
        else:
            dlog.debug("step 1: %s is not divisible", node.label)
            _collapse(node)
    pruned = _with_root(dendrogram, root)
    dlog.info("pruning step 1: %d leaves", pruned.leaf_count)
    return pruned


def _pick_merge(leaves: list[ClusterNode], counts: list[int]) -> ClusterNode:
    # most insignificant comparisons, then smaller size, then lowest member
    best = min(
        range(len(leaves)),
        key=lambda ii: (-counts[ii], leaves[ii].size, leaves[ii].min_member),
    )
    return leaves[best]


def prune_step2(
    dendrogram: Dendrogram,
    traits: Iterable[int],
    alpha: float = 0.05,
    family_size: Optional[int] = None,
    grid: int = DEFAULT_GRID,
    refine: bool = True,
    threads: int = 1,
    correction: str = "holm",
) -> PersonaSet:
    """Merge leaves until every pair is significantly different.

    Each round compares all leaves pairwise, picks the leaf with the most
    insignificant comparisons and collapses its parent into one leaf.

    Parameters
    ----------
    dendrogram : Dendrogram
        tree after :func:`prune_step1`
    traits : iterable of int
        discriminative traits tested
    alpha : float
        family-wise error rate
    family_size : int, optional
        correction family size, defaults to the number of traits
    grid : int
        Boschloo nuisance grid
    refine : bool
        refine the Boschloo grid maximum
    threads : int
        worker processes for the pairwise comparisons
    correction : str
        ``holm`` or ``bonferroni``

    Returns
    -------
    PersonaSet
        the personas with their final pairwise reports
    """
    traits = tuple(sorted(traits))
    family = len(traits) if family_size is None else int(family_size)
    root = _copy_tree(dendrogram.root)
    cache: dict[tuple[tuple[int, ...], tuple[int, ...]], TestReport] = {}
    while True:
        leaves = root.leaves()
        missing = [
            (ii, jj)
            for ii, jj in combinations(range(len(leaves)), 2)
            if (leaves[ii].members, leaves[jj].members) not in cache
        ]
        if missing:
            fresh = compare_pairs(
                [(leaves[ii], leaves[jj]) for ii, jj in missing],
                traits,
                alpha,
                family,
                grid,
                refine,
                threads,
                correction,
            )
            for (ii, jj), rr in zip(missing, fresh):
                cache[(leaves[ii].members, leaves[jj].members)] = rr
        reports = {
            (ii, jj): cache[(leaves[ii].members, leaves[jj].members)]
            for ii, jj in combinations(range(len(leaves)), 2)
        }
        counts = [0] * len(leaves)
        for (ii, jj), rr in reports.items():
            if not rr.significant:
                counts[ii] += 1
                counts[jj] += 1
        if not any(counts):
            break
        leaf = _pick_merge(leaves, counts)
        parent = next(nn for nn in root.walk() if any(cc is leaf for cc in nn.children))
        dlog.debug(
            "step 2: %s has %d insignificant comparisons, merging into %s",
            leaf.label,
            counts[leaves.index(leaf)],
            parent.label,
        )
        _collapse(parent)
    pruned = _with_root(dendrogram, root)
    personas = PersonaSet(
        leaves=leaves,
        traits=traits,
        alpha=alpha,
        family_size=family,
        pairwise_reports=reports,
        dendrogram=pruned,
        correction=correction,
    )
    dlog.info("pruning step 2: %d personas", len(personas))
    return personas


def ci_overlap_check(
    personas: PersonaSet, confidence: float = 0.95
) -> dict[tuple[int, int], CIOverlap]:
    """Compare the Agresti intervals of every trait for every persona pair.

    The result is also stored in ``personas.ci_overlap``.
    """
    traits = personas.traits
    intervals = []
    for leaf in personas.leaves:
        counts = trait_counts(leaf, traits)
        intervals.append([agresti_interval(int(cc), leaf.size, confidence) for cc in counts])
    ret = {}
    for ii, jj in combinations(range(len(personas.leaves)), 2):
        flags = tuple(
            not intervals_overlap(ia, ib) for ia, ib in zip(intervals[ii], intervals[jj])
        )
        ret[(ii, jj)] = CIOverlap(
            personas.leaves[ii].id, personas.leaves[jj].id, traits, flags
        )
    personas.ci_overlap = ret
    failing = [kk for kk, vv in ret.items() if not vv.passes]
    if failing:
        dlog.warning("%d persona pair(s) have overlapping intervals on every trait", len(failing))
    return ret


def verify_personas(
    members: Sequence[Sequence[int]],
    dataset: Dataset,
    traits: Iterable[int],
    alpha: float = 0.05,
    family_size: Optional[int] = None,
    confidence: float = 0.95,
    grid: int = DEFAULT_GRID,
    refine: bool = True,
    correction: str = "holm",
) -> list[dict]:
    """Re-check a persona partition from the raw trait counts.

    Every pair must have a trait rejected by ``correction`` and a trait with
    non-overlapping intervals, and the personas must partition the dataset.
    Nothing is modified.

    Returns
    -------
    list of dict
        violations, empty when the personas are sound
    """
    traits = np.asarray(sorted(traits), dtype=int)
    if traits.size == 0:
        raise DegenerateInputError("no traits to verify the personas on")
    n = len(dataset)
    violations = []
    seen = np.zeros(n, dtype=int)
    groups = [np.asarray(sorted(mm), dtype=int) for mm in members]
    for gg in groups:
        if gg.size == 0 or gg.min() < 0 or gg.max() >= n:
            violations.append({"kind": "partition", "message": "persona with invalid members"})
            continue
        seen[gg] += 1
    if np.any(seen != 1):
        violations.append(
            {
                "kind": "partition",
                "message": "personas do not partition the participants",
                "participants": [int(ii) for ii in np.flatnonzero(seen != 1)],
            }
        )
    counts = [dataset.trait_matrix[gg][:, traits - 1].sum(axis=0) for gg in groups]
    for ii, jj in combinations(range(len(groups)), 2):
        na, nb = groups[ii].size, groups[jj].size
        if na == 0 or nb == 0:
            continue
        p_values = [
            boschloo((int(ca), na, int(cb), nb), grid=grid, refine=refine).p_boschloo
            for ca, cb in zip(counts[ii], counts[jj])
        ]
        if not correct(p_values, alpha, family_size, correction).any_rejected:
            violations.append(
                {"kind": "not_significant", "pair": [ii, jj], "min_p": float(min(p_values))}
            )
        separated = any(
            not intervals_overlap(
                agresti_interval(int(ca), na, confidence),
                agresti_interval(int(cb), nb, confidence),
            )
            for ca, cb in zip(counts[ii], counts[jj])
        )
        if not separated:
            violations.append({"kind": "ci_overlap", "pair": [ii, jj]})
    return violations
