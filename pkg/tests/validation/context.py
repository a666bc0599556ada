import os
import sys

import numpy as np

sys.path.insert(0, os.path.abspath(os.path.join(os.path.dirname(__file__), "..", "..")))
import ppgen.validation.saturation  # noqa: F401
import ppgen.validation.sensitivity  # noqa: F401
from ppgen.features.dataset import Dataset
from ppgen.features.schema import VariableDef, VariableSchema


def ladder_schema() -> VariableSchema:
    return VariableSchema(
        (
            VariableDef("l_1", "likert", (1, 2, 3), (0, 1)),
            VariableDef("l_2", "likert", (4, 5, 6), (0, 1)),
            VariableDef("b_1", "binary", (7,)),
        ),
        7,
    )


def ladder_dataset(levels, prefix: str = "g", role: str = "generation") -> Dataset:
    """One participant per ``(level of l_1, level of l_2)`` pair, binary trait unset."""
    matrix = np.zeros((len(levels), 7), dtype=np.uint8)
    for ii, (aa, bb) in enumerate(levels):
        matrix[ii, aa] = 1
        matrix[ii, 3 + bb] = 1
    ids = [f"{prefix}{ii}" for ii in range(len(levels))]
    return Dataset.from_trait_matrix(ladder_schema(), ids, matrix, role=role)


def pair_oracle(labels_a, labels_b) -> float:
    """Fowlkes-Mallows index by enumerating every pair of points."""
    n = len(labels_a)
    tp = fp = fn = 0
    for ii in range(n):
        for jj in range(ii + 1, n):
            same_a = labels_a[ii] == labels_a[jj]
            same_b = labels_b[ii] == labels_b[jj]
            tp += same_a and same_b
            fp += same_a and not same_b
            fn += same_b and not same_a
    if tp == 0:
        return 0.0
    return tp / np.sqrt((tp + fp) * (tp + fn))
