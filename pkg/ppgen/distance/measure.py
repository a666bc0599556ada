r"""Dissimilarity of two participants in explanatory form.

.. math::

    d(p_i', p_j') = \max\left(0, \frac{\lVert l_i - l_j \rVert_1}{\sum_k r(l_k)}
                    - \frac{b_i \cdot b_j}{B}\right)

The Likert part penalizes every disagreement, the binary part only rewards
agreement: a zero bit means "did not mention", not "disagrees". After
:func:`~ppgen.features.dataset.mask_traits` both normalizers only count the
retained variables, which keeps ``d`` in ``[0, 1]``.

``d`` is not a metric; the triangle inequality does not hold in general.
"""

import os
from collections.abc import Iterable
from dataclasses import dataclass, field
from functools import partial
from typing import Optional, Union

import h5py
import numpy as np
import pandas as pd

from ppgen import dlog
from ppgen.errors import DegenerateInputError, SchemaError
from ppgen.features.dataset import Dataset, ExplanatoryVector
from ppgen.features.schema import VariableSchema
from ppgen.util import check_format_version, parallel_map

CACHE_FORMAT_VERSION = "1.0"
DIAGONAL_POLICIES = ("zero", "one")
# rows per block when the matrix is assembled in parallel
_BLOCK_ROWS = 64


@dataclass(frozen=True, eq=False)
class DistanceMatrix:
    """Symmetric n x n dissimilarities with a fixed diagonal."""

    values: np.ndarray
    diagonal_policy: str = "zero"
    ids: tuple[str, ...] = field(default=())

    @property
    def n(self) -> int:
        return self.values.shape[0]

    def submatrix(self, indices) -> "DistanceMatrix":
        indices = np.asarray(indices, dtype=int)
        values = self.values[np.ix_(indices, indices)].copy()
        values.setflags(write=False)
        ids = tuple(self.ids[ii] for ii in indices) if self.ids else ()
        return DistanceMatrix(values, self.diagonal_policy, ids)


def normalizers(schema: VariableSchema, keep: Optional[Iterable[int]] = None) -> tuple[float, int]:
    """Return ``(sum of Likert ranges, binary count)`` over the retained variables.

    A Likert variable counts when at least one of its levels is retained; a
    binary variable counts when its trait is retained.
    """
    keep = None if keep is None else set(keep)
    range_sum = 0.0
    for var in schema.likert:
        if keep is None or any(tt in keep for tt in var.trait_levels):
            range_sum += var.range_width
    binary_count = sum(
        1 for var in schema.binary if keep is None or var.trait_levels[0] in keep
    )
    return range_sum, binary_count


def _check_normalizers(active_likert_range_sum: float, active_binary_count: int):
    if not active_likert_range_sum > 0 or not active_binary_count > 0:
        raise DegenerateInputError(
            "zero normalizer in the dissimilarity (no retained Likert or binary variable)",
            details={
                "active_likert_range_sum": active_likert_range_sum,
                "active_binary_count": active_binary_count,
            },
        )


def distance(
    schema: VariableSchema,
    a: ExplanatoryVector,
    b: ExplanatoryVector,
    active_likert_range_sum: float,
    active_binary_count: int,
) -> float:
    """Dissimilarity of two participants.

    Parameters
    ----------
    schema : VariableSchema
        schema both vectors conform to
    a, b : ExplanatoryVector
        explanatory forms of the two participants
    active_likert_range_sum : float
        sum of the ranges of the retained Likert variables
    active_binary_count : int
        number of retained binary variables

    Returns
    -------
    float
        dissimilarity in [0, 1]

    Raises
    ------
    DegenerateInputError
        if a normalizer is not positive
    """
    _check_normalizers(active_likert_range_sum, active_binary_count)
    if a.likert.shape != (schema.L,) or b.likert.shape != (schema.L,):
        raise SchemaError("explanatory vectors do not match the schema")
    l1 = float(np.abs(a.likert - b.likert).sum())
    dot = int(np.dot(a.binary.astype(np.int64), b.binary.astype(np.int64)))
    return max(0.0, l1 / active_likert_range_sum - dot / active_binary_count)


def _distance_block(
    rows: tuple[int, int],
    likert_a: np.ndarray,
    binary_a: np.ndarray,
    likert_b: np.ndarray,
    binary_b: np.ndarray,
    range_sum: float,
    binary_count: int,
) -> np.ndarray:
    lo, hi = rows
    la = likert_a[lo:hi]
    l1 = np.zeros((hi - lo, likert_b.shape[0]))
    for kk in range(likert_b.shape[1]):
        l1 += np.abs(la[:, kk, None] - likert_b[None, :, kk])
    dot = binary_a[lo:hi].astype(np.int64) @ binary_b.astype(np.int64).T
    return np.maximum(0.0, l1 / range_sum - dot / binary_count)


def _pairwise(
    likert_a: np.ndarray,
    binary_a: np.ndarray,
    likert_b: np.ndarray,
    binary_b: np.ndarray,
    range_sum: float,
    binary_count: int,
    threads: int = 1,
) -> np.ndarray:
    _check_normalizers(range_sum, binary_count)
    n = likert_a.shape[0]
    blocks = [(lo, min(lo + _BLOCK_ROWS, n)) for lo in range(0, n, _BLOCK_ROWS)]
    if not blocks:
        return np.zeros((0, likert_b.shape[0]))
    func = partial(
        _distance_block,
        likert_a=likert_a,
        binary_a=binary_a,
        likert_b=likert_b,
        binary_b=binary_b,
        range_sum=range_sum,
        binary_count=binary_count,
    )
    # every entry is computed by the same operations in any block layout
    return np.vstack(parallel_map(func, blocks, threads))


def distance_matrix(
    dataset: Dataset, diagonal_policy: str = "zero", threads: int = 1
) -> DistanceMatrix:
    """Pairwise dissimilarities of a dataset.

    Parameters
    ----------
    dataset : Dataset
        non-empty dataset, possibly masked
    diagonal_policy : str
        ``zero`` (clustering) or ``one`` (nearest-neighbour search, avoids
        self-similarity)
    threads : int
        worker processes; the result does not depend on it

    Returns
    -------
    DistanceMatrix
        symmetric matrix with entries in [0, 1]
    """
    if diagonal_policy not in DIAGONAL_POLICIES:
        raise ValueError(f"unknown diagonal policy {diagonal_policy!r}")
    if len(dataset) == 0:
        raise DegenerateInputError("cannot build a distance matrix of an empty dataset")
    range_sum, binary_count = normalizers(dataset.schema, dataset.keep)
    values = _pairwise(
        dataset.likert_matrix,
        dataset.binary_matrix,
        dataset.likert_matrix,
        dataset.binary_matrix,
        range_sum,
        binary_count,
        threads,
    )
    np.fill_diagonal(values, 0.0 if diagonal_policy == "zero" else 1.0)
    values.setflags(write=False)
    dlog.debug("distance matrix of %d participants", len(dataset))
    return DistanceMatrix(values, diagonal_policy, tuple(dataset.ids))


def cross_distance_matrix(gen: Dataset, val: Dataset, threads: int = 1) -> np.ndarray:
    """|gen| x |val| dissimilarities, without any diagonal exclusion."""
    if gen.schema != val.schema:
        raise SchemaError("generation and validation datasets use different schemas")
    if gen.active_traits != val.active_traits:
        raise SchemaError("generation and validation datasets use different trait masks")
    range_sum, binary_count = normalizers(gen.schema, gen.keep)
    values = _pairwise(
        gen.likert_matrix,
        gen.binary_matrix,
        val.likert_matrix,
        val.binary_matrix,
        range_sum,
        binary_count,
        threads,
    )
    if values.shape != (len(gen), len(val)):
        values = values.reshape(len(gen), len(val))
    return values


def write_matrix_csv(
    values: np.ndarray,
    path: Union[str, os.PathLike],
    row_ids,
    col_ids=None,
):
    """Write a matrix as CSV with a header row of participant IDs."""
    col_ids = row_ids if col_ids is None else col_ids
    frame = pd.DataFrame(np.asarray(values), index=list(row_ids), columns=list(col_ids))
    frame.index.name = "id"
    frame.to_csv(path, float_format="%.17g")


def save_distance_cache(dm: DistanceMatrix, path: Union[str, os.PathLike]):
    """Store a distance matrix in HDF5.

    Layout: dataset ``values`` (float64, n x n), dataset ``ids`` (UTF-8
    strings), attributes ``format_version`` and ``diagonal_policy``.
    """
    with h5py.File(path, "w") as f:
        f.attrs["format_version"] = CACHE_FORMAT_VERSION
        f.attrs["diagonal_policy"] = dm.diagonal_policy
        f.create_dataset("values", data=np.asarray(dm.values, dtype=np.float64))
        f.create_dataset(
            "ids", data=np.asarray(dm.ids, dtype=object), dtype=h5py.string_dtype()
        )


def load_distance_cache(path: Union[str, os.PathLike]) -> DistanceMatrix:
    with h5py.File(path, "r") as f:
        version = f.attrs.get("format_version", "")
        if isinstance(version, bytes):
            version = version.decode()
        check_format_version(version, CACHE_FORMAT_VERSION, "distance cache")
        policy = f.attrs["diagonal_policy"]
        if isinstance(policy, bytes):
            policy = policy.decode()
        values = np.asarray(f["values"][()], dtype=np.float64)
        ids = tuple(
            ii.decode() if isinstance(ii, bytes) else str(ii) for ii in f["ids"][()]
        )
    values.setflags(write=False)
    return DistanceMatrix(values, str(policy), ids)
