import os
import sys

import numpy as np

sys.path.insert(0, os.path.abspath(os.path.join(os.path.dirname(__file__), "..", "..")))
import ppgen.persona.compare  # noqa: F401
import ppgen.persona.prune  # noqa: F401
import ppgen.persona.report  # noqa: F401
import ppgen.persona.selection  # noqa: F401
from ppgen.cluster.diana import ClusterNode, Dendrogram, descriptor
from ppgen.features.dataset import Dataset
from ppgen.features.schema import VariableDef, VariableSchema

GROUP_SIZE = 12
# traits of the four planted groups X1, X2, Y1, Y2; X1 and Y1 share their binary trait
GROUP_TRAITS = ([1, 4], [1, 5], [3, 4], [3, 6])
BINARY_TRAITS = (4, 5, 6)
# fast Boschloo settings for tests
GRID = 100
REFINE = False


def group_schema() -> VariableSchema:
    return VariableSchema(
        (
            VariableDef(
                "l_1", "likert", (1, 2, 3), (0, 1), source="closed_question", label="side"
            ),
            VariableDef("b_1", "binary", (4,)),
            VariableDef("b_2", "binary", (5,)),
            VariableDef("b_3", "binary", (6,)),
        ),
        6,
        ("left", "middle", "right", "shared", "x only", "y only"),
    )


def group_dataset() -> Dataset:
    """48 participants: X1 = 0..11, X2 = 12..23, Y1 = 24..35, Y2 = 36..47."""
    rows = []
    for traits in GROUP_TRAITS:
        row = np.zeros(6, dtype=np.uint8)
        row[np.asarray(traits) - 1] = 1
        rows += [row] * GROUP_SIZE
    ids = [f"p{ii:02d}" for ii in range(len(rows))]
    return Dataset.from_trait_matrix(group_schema(), ids, np.vstack(rows))


def _node(node_id, members, dataset, children=(), split_order=-1) -> ClusterNode:
    return ClusterNode(
        node_id, tuple(members), descriptor(list(members), dataset), list(children), split_order
    )


def group_dendrogram(dataset: Dataset) -> Dendrogram:
    """X | Y, then X1 | X2, then Y1 | Y2, then an insignificant split of X1."""
    g = GROUP_SIZE
    x1 = _node(
        (3, 1),
        range(0, g),
        dataset,
        [_node((5, 1), range(0, g // 2), dataset), _node((5, 2), range(g // 2, g), dataset)],
        3,
    )
    x = _node((2, 1), range(0, 2 * g), dataset, [x1, _node((3, 2), range(g, 2 * g), dataset)], 1)
    y = _node(
        (2, 2),
        range(2 * g, 4 * g),
        dataset,
        [_node((4, 3), range(2 * g, 3 * g), dataset), _node((4, 4), range(3 * g, 4 * g), dataset)],
        2,
    )
    root = _node((1, 1), range(4 * g), dataset, [x, y], 0)
    split_log = [
        ((1, 1), ((2, 1), (2, 2))),
        ((2, 1), ((3, 1), (3, 2))),
        ((2, 2), ((4, 3), (4, 4))),
        ((3, 1), ((5, 1), (5, 2))),
    ]
    return Dendrogram(root, split_log)
