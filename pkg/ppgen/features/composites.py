"""Composite Likert variables derived from pairs of 5-level answers.

Two composites are built from signed level differences ``d`` in ``-4..4``:
the change of privacy protection importance (end minus initial) and the
mismatch between perceived and desired control (perceived minus desired).
Differences are binned into seven ordered categories::

    index  0        1            2       3     4       5            6
    |d|    4        2..3         1       0     1       2..3         4
    sign   -        -            -             +       +            +
"""

import numpy as np

from ppgen.errors import SchemaError
from ppgen.features.schema import VariableSchema

N_LEVELS_ANSWER = 5
N_LEVELS_COMPOSITE = 7

DELTA_IMPORTANCE_LABELS = (
    "drastic decrease",
    "significant decrease",
    "slight decrease",
    "no change",
    "slight increase",
    "significant increase",
    "drastic increase",
)
CONTROL_MISMATCH_LABELS = (
    "extreme (less control than wanted)",
    "significant (less control than wanted)",
    "slight (less control than wanted)",
    "no mismatch",
    "slight (more control than wanted)",
    "significant (more control than wanted)",
    "extreme (more control than wanted)",
)


def bin_difference(delta: int) -> int:
    """Map a signed difference in ``-4..4`` onto the 7-level category index."""
    if not -4 <= delta <= 4:
        raise ValueError(f"difference {delta} outside -4..4")
    magnitude = abs(delta)
    if magnitude == 0:
        step = 0
    elif magnitude == 1:
        step = 1
    elif magnitude <= 3:
        step = 2
    else:
        step = 3
    return 3 + step if delta > 0 else 3 - step


def _check_level(name: str, level: int):
    if not 0 <= level < N_LEVELS_ANSWER:
        raise ValueError(f"{name} level {level} outside 0..{N_LEVELS_ANSWER - 1}")


def derive_composites(
    importance_initial: int,
    importance_end: int,
    control_desired: int,
    control_perceived: int,
) -> tuple[int, int]:
    """Derive the importance change and the control mismatch categories.

    Parameters
    ----------
    importance_initial, importance_end : int
        level indices (0..4) of the initial and final importance answers
    control_desired, control_perceived : int
        level indices (0..4) of the desired and perceived control answers

    Returns
    -------
    tuple of int
        ``(delta_importance, control_mismatch)`` as 7-level category indices

    Raises
    ------
    ValueError
        if a level index is outside 0..4
    """
    _check_level("importance_initial", importance_initial)
    _check_level("importance_end", importance_end)
    _check_level("control_desired", control_desired)
    _check_level("control_perceived", control_perceived)
    return (
        bin_difference(importance_end - importance_initial),
        bin_difference(control_perceived - control_desired),
    )


def _set_level(schema: VariableSchema, bits: np.ndarray, var_id: str, level: int):
    var = schema.variable(var_id)
    if len(var.trait_levels) != N_LEVELS_COMPOSITE:
        raise SchemaError(f"{var_id} must have {N_LEVELS_COMPOSITE} levels")
    cols = np.asarray(var.trait_levels) - 1
    bits[cols] = 0
    bits[cols[level]] = 1


def _answer_level(schema: VariableSchema, bits: np.ndarray, var_id: str) -> int:
    var = schema.variable(var_id)
    if len(var.trait_levels) != N_LEVELS_ANSWER:
        raise SchemaError(f"{var_id} must have {N_LEVELS_ANSWER} levels")
    levels = np.flatnonzero(bits[np.asarray(var.trait_levels) - 1])
    if levels.size != 1:
        raise ValueError(f"{var_id} must have exactly one set level to derive composites")
    return int(levels[0])


def apply_composites(
    schema: VariableSchema,
    traits,
    importance_initial: str = "l_3",
    importance_end: str = "l_12",
    control_desired: str = "l_5",
    control_perceived: str = "l_9",
    delta_importance: str = "l_13",
    control_mismatch: str = "l_14",
) -> np.ndarray:
    """Recompute the composite Likert bits of a trait vector from its raw answers.

    The default variable IDs follow the reference schema.

    Returns
    -------
    np.ndarray
        a copy of ``traits`` with the composite levels replaced

    Raises
    ------
    ValueError
        if an answer does not have exactly one set level
    SchemaError
        if a variable is unknown or has the wrong number of levels
    """
    bits = np.array(traits, dtype=np.uint8, copy=True)
    delta, mismatch = derive_composites(
        _answer_level(schema, bits, importance_initial),
        _answer_level(schema, bits, importance_end),
        _answer_level(schema, bits, control_desired),
        _answer_level(schema, bits, control_perceived),
    )
    _set_level(schema, bits, delta_importance, delta)
    _set_level(schema, bits, control_mismatch, mismatch)
    return bits
