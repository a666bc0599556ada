"""DIANA: divisive analysis clustering.

Clustering starts from a single cluster holding every participant. At each
step the leaf chosen by the split rule (largest diameter by default) is
divided by the splinter procedure, until every leaf is a singleton or the
requested number of splits is reached.

Nodes are named ``U^v_k``: ``v`` is the number of clusters of the first cut
containing the node, ``k`` its 1-based position in that cut when clusters are
ordered by their smallest member index. Ties are always broken toward the
smallest participant index, so the tree is fully determined by its inputs.
"""

from collections.abc import Iterator
from typing import Optional, Union

import numpy as np

from ppgen import dlog
from ppgen.distance.measure import DistanceMatrix
from ppgen.errors import DegenerateInputError
from ppgen.features.dataset import Dataset

SPLIT_RULES = ("diameter", "avg-dissimilarity", "largest")
LEVEL_SEMANTICS = ("split-order", "depth")


class ClusterNode:
    """A cluster of the dendrogram.

    Parameters
    ----------
    id : tuple of int
        ``(v, k)``
    members : tuple of int
        sorted participant indices
    descriptor : np.ndarray
        frequency of every trait among the members
    children : list of ClusterNode
        empty for a leaf, two nodes otherwise
    split_order : int
        position of this node's split in the global split sequence, ``-1``
        for a leaf
    """

    def __init__(
        self,
        id: tuple[int, int],
        members: tuple[int, ...],
        descriptor: np.ndarray,
        children: Optional[list["ClusterNode"]] = None,
        split_order: int = -1,
    ):
        self.id = id
        self.members = members
        self.descriptor = descriptor
        self.children = [] if children is None else children
        self.split_order = split_order

    def __repr__(self):
        return f"ClusterNode {self.label}: {self.size} members"

    @property
    def is_leaf(self) -> bool:
        return not self.children

    @property
    def size(self) -> int:
        return len(self.members)

    @property
    def min_member(self) -> int:
        return self.members[0]

    @property
    def label(self) -> str:
        return f"U^{self.id[0]}_{self.id[1]}"

    @property
    def persona_id(self) -> str:
        return f"{self.id[0]}.{self.id[1]}"

    def walk(self) -> Iterator["ClusterNode"]:
        """Pre-order traversal, first child first."""
        yield self
        for child in self.children:
            yield from child.walk()

    def leaves(self) -> list["ClusterNode"]:
        return sorted((nn for nn in self.walk() if nn.is_leaf), key=lambda nn: nn.min_member)


class Dendrogram:
    """Binary divisive tree; ``split_log`` lists ``(parent id, (child ids))`` in split order."""

    def __init__(
        self,
        root: ClusterNode,
        split_log: list[tuple[tuple[int, int], tuple[tuple[int, int], tuple[int, int]]]],
        rng_seed: int = 0,
        split_rule: str = "diameter",
    ):
        self.root = root
        self.split_log = split_log
        self.rng_seed = rng_seed
        self.split_rule = split_rule

    def __repr__(self):
        return f"Dendrogram of {self.n} participants, {len(self.split_log)} splits"

    @property
    def n(self) -> int:
        return self.root.size

    def nodes(self) -> Iterator[ClusterNode]:
        return self.root.walk()

    def leaves(self) -> list[ClusterNode]:
        return self.root.leaves()

    @property
    def leaf_count(self) -> int:
        return len(self.leaves())

    def split_nodes(self) -> list[ClusterNode]:
        """Internal nodes in split order."""
        return sorted(
            (nn for nn in self.nodes() if not nn.is_leaf), key=lambda nn: nn.split_order
        )

    def find(self, node_id: tuple[int, int]) -> ClusterNode:
        for nn in self.nodes():
            if nn.id == tuple(node_id):
                return nn
        raise KeyError(f"no node {node_id}")

    def parent_of(self, node: ClusterNode) -> Optional[ClusterNode]:
        for nn in self.nodes():
            if any(cc is node for cc in nn.children):
                return nn
        return None


def _as_values(dm: Union[DistanceMatrix, np.ndarray]) -> np.ndarray:
    return dm.values if isinstance(dm, DistanceMatrix) else np.asarray(dm, dtype=float)


def descriptor(members, dataset: Dataset) -> np.ndarray:
    """Fraction of members having each trait.

    Raises
    ------
    DegenerateInputError
        for an empty cluster
    """
    members = np.asarray(members, dtype=int)
    if members.size == 0:
        raise DegenerateInputError("descriptor of an empty cluster")
    return dataset.trait_matrix[members].sum(axis=0) / members.size


def diana_split(members, dm: Union[DistanceMatrix, np.ndarray]) -> tuple[tuple[int, ...], tuple[int, ...]]:
    """Split a cluster with the splinter procedure.

    The member with the largest average dissimilarity to the others seeds
    the splinter group. Then, while some remaining member is on average
    closer to the splinter group than to the other remaining members, the
    one with the largest such difference moves over.

    Parameters
    ----------
    members : sequence of int
        participant indices, at least two
    dm : DistanceMatrix or np.ndarray
        full distance matrix

    Returns
    -------
    tuple
        ``(splinter group, remaining group)``, both sorted and non-empty

    Raises
    ------
    DegenerateInputError
        for a singleton cluster
    """
    members = np.sort(np.asarray(members, dtype=int))
    m = members.size
    if m < 2:
        raise DegenerateInputError("a singleton cluster cannot be split")
    if m == 2:
        return (int(members[0]),), (int(members[1]),)
    sub = _as_values(dm)[np.ix_(members, members)].copy()
    np.fill_diagonal(sub, 0.0)
    seed = int(np.argmax(sub.sum(axis=1) / (m - 1)))
    in_splinter = np.zeros(m, dtype=bool)
    in_splinter[seed] = True
    while in_splinter.sum() < m - 1:
        n_spl = in_splinter.sum()
        n_rest = m - n_spl
        to_splinter = sub[:, in_splinter].sum(axis=1) / n_spl
        # self distance is zero, so the row sum over the rest excludes it
        to_rest = sub[:, ~in_splinter].sum(axis=1) / (n_rest - 1)
        diff = np.where(in_splinter, -np.inf, to_rest - to_splinter)
        best = int(np.argmax(diff))
        if not diff[best] > 0:
            break
        in_splinter[best] = True
    splinter = tuple(int(ii) for ii in members[in_splinter])
    rest = tuple(int(ii) for ii in members[~in_splinter])
    return splinter, rest


def _split_score(members: tuple[int, ...], values: np.ndarray, split_rule: str) -> float:
    if split_rule == "largest":
        return float(len(members))
    idx = np.asarray(members)
    sub = values[np.ix_(idx, idx)].copy()
    np.fill_diagonal(sub, 0.0)
    if split_rule == "diameter":
        return float(sub.max())
    m = len(members)
    return float(sub.sum() / (m * (m - 1)))


def build_dendrogram(
    dataset: Dataset,
    dm: Union[DistanceMatrix, np.ndarray],
    max_depth: Optional[int] = None,
    split_rule: str = "diameter",
    rng_seed: int = 0,
) -> Dendrogram:
    """Grow a divisive dendrogram.

    Parameters
    ----------
    dataset : Dataset
        participants clustered; descriptors are computed from its traits
    dm : DistanceMatrix or np.ndarray
        distances between the participants of ``dataset``
    max_depth : int, optional
        maximum number of splits; ``None`` grows the tree until every leaf
        is a singleton
    split_rule : str
        leaf chosen next: ``diameter`` (largest maximum intra-cluster
        distance), ``avg-dissimilarity`` (largest mean intra-cluster
        distance) or ``largest`` (most members)
    rng_seed : int
        recorded in the dendrogram for provenance

    Returns
    -------
    Dendrogram
        the grown tree
    """
    if split_rule not in SPLIT_RULES:
        raise ValueError(f"split_rule must be one of {SPLIT_RULES}, got {split_rule!r}")
    n = len(dataset)
    if n == 0:
        raise DegenerateInputError("cannot cluster an empty dataset")
    values = _as_values(dm)
    if values.shape != (n, n):
        raise DegenerateInputError(
            f"distance matrix shape {values.shape} does not match {n} participants"
        )
    root = ClusterNode((1, 1), tuple(range(n)), descriptor(range(n), dataset))
    leaves = [root]
    scores = {id(root): _split_score(root.members, values, split_rule) if n > 1 else 0.0}
    split_log = []
    limit = n - 1 if max_depth is None else min(int(max_depth), n - 1)
    for split in range(limit):
        # leaves are kept sorted by smallest member
        candidates = [ll for ll in leaves if ll.size > 1]
        if not candidates:
            break
        node = max(candidates, key=lambda ll: scores[id(ll)])
        group_a, group_b = diana_split(node.members, values)
        node.split_order = split
        children = sorted(
            (
                ClusterNode((split + 2, 0), group, descriptor(group, dataset))
                for group in (group_a, group_b)
            ),
            key=lambda cc: cc.min_member,
        )
        node.children = children
        leaves.remove(node)
        leaves.extend(children)
        leaves.sort(key=lambda ll: ll.min_member)
        for cc in children:
            cc.id = (split + 2, leaves.index(cc) + 1)
            scores[id(cc)] = _split_score(cc.members, values, split_rule) if cc.size > 1 else 0.0
        split_log.append((node.id, (children[0].id, children[1].id)))
        dlog.debug("split %d: %s -> %s + %s", split, node.label, children[0].label, children[1].label)
    return Dendrogram(root, split_log, rng_seed, split_rule)


def cut_at_level(dendrogram: Dendrogram, v: int) -> list[ClusterNode]:
    """The ``v`` clusters present after the first ``v - 1`` splits.

    Clusters are ordered by their smallest member.
    """
    splits = dendrogram.split_nodes()
    if not 1 <= v <= len(splits) + 1:
        raise ValueError(f"level {v} outside 1..{len(splits) + 1}")
    current = [dendrogram.root]
    for node in splits[: v - 1]:
        current.remove(node)
        current.extend(node.children)
    return sorted(current, key=lambda nn: nn.min_member)


def cut_at_depth(dendrogram: Dendrogram, depth: int) -> list[ClusterNode]:
    """Nodes at tree depth ``depth`` plus the shallower leaves."""
    if depth < 0:
        raise ValueError(f"depth must be non-negative, got {depth}")
    current = [dendrogram.root]
    for _ in range(depth):
        current = [cc for nn in current for cc in (nn.children or [nn])]
    return sorted(current, key=lambda nn: nn.min_member)


def labels_of(clusters: list[ClusterNode], n: int) -> np.ndarray:
    labels = np.full(n, -1, dtype=int)
    for ii, cc in enumerate(clusters):
        labels[list(cc.members)] = ii
    return labels


def _check_semantics(semantics: str):
    if semantics not in LEVEL_SEMANTICS:
        raise ValueError(f"level semantics must be one of {LEVEL_SEMANTICS}, got {semantics!r}")


def tree_height(dendrogram: Dendrogram) -> int:
    """Number of edges on the longest root-to-leaf path."""
    height = 0
    stack = [(dendrogram.root, 0)]
    while stack:
        node, depth = stack.pop()
        height = max(height, depth)
        stack.extend((cc, depth + 1) for cc in node.children)
    return height


def cut_level(dendrogram: Dendrogram, v: int, semantics: str = "split-order") -> list[ClusterNode]:
    """Clusters of level ``v``.

    ``split-order``: the ``v`` clusters after the first ``v - 1`` splits.
    ``depth``: the nodes at tree depth ``v - 1``, plus shallower leaves; a
    level below the deepest leaf gives the leaves.
    """
    _check_semantics(semantics)
    if semantics == "depth":
        if v < 1:
            raise ValueError(f"level must be positive, got {v}")
        return cut_at_depth(dendrogram, v - 1)
    return cut_at_level(dendrogram, v)


def labels_at_level(dendrogram: Dendrogram, v: int, semantics: str = "split-order") -> np.ndarray:
    """One cluster label per participant for the cut of level ``v``."""
    return labels_of(cut_level(dendrogram, v, semantics), dendrogram.n)


def max_level(dendrogram: Dendrogram, semantics: str = "split-order") -> int:
    """Deepest level with a distinct cut."""
    _check_semantics(semantics)
    if semantics == "depth":
        return tree_height(dendrogram) + 1
    return len(dendrogram.split_nodes()) + 1


def split_budget(levels: int, semantics: str = "split-order") -> Optional[int]:
    """Splits needed to cut ``levels`` levels; ``None`` grows the full tree."""
    _check_semantics(semantics)
    return levels - 1 if semantics == "split-order" else None
