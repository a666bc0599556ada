import os
import sys

import numpy as np

sys.path.insert(0, os.path.abspath(os.path.join(os.path.dirname(__file__), "..", "..")))
import ppgen.cluster.diana  # noqa: F401
import ppgen.cluster.export  # noqa: F401
from ppgen.features.dataset import Dataset
from ppgen.features.schema import VariableDef, VariableSchema

LINE_POSITIONS = np.array([0.0, 1.0, 2.0, 10.0, 11.0])


def line_dataset() -> Dataset:
    """Five participants; b_1 marks the left group, b_2 the right one."""
    schema = VariableSchema(
        (
            VariableDef("b_1", "binary", (1,)),
            VariableDef("b_2", "binary", (2,)),
            VariableDef("b_3", "binary", (3,)),
        ),
        3,
    )
    matrix = [
        [1, 0, 1],
        [1, 0, 0],
        [1, 0, 1],
        [0, 1, 0],
        [0, 1, 1],
    ]
    return Dataset.from_trait_matrix(schema, ["a", "b", "c", "d", "e"], matrix)


def line_distances() -> np.ndarray:
    """Distances of points on a line, scaled into [0, 1]."""
    pos = LINE_POSITIONS
    return np.abs(pos[:, None] - pos[None, :]) / (pos.max() - pos.min())
