"""Participants, their trait vectors and the derived explanatory form.

A participant is a bit vector ``p`` over the ``T`` traits of a
:class:`~ppgen.features.schema.VariableSchema`. Its explanatory form
``p' = l (+) b`` concatenates one numeric value per Likert variable with one
bit per binary variable.

Data files are either CSV (one row per participant, the participant ID in the
first column followed by ``T`` columns of 0/1 in trait-index order; optional
leading ``#`` lines such as ``# format_version: 1.0``; a header row is
optional and is recognised by trait cells that are not all 0/1) or JSON::

    {"format_version": "1.0",
     "participants": [{"id": "P001", "set_traits": [3, 5, 12, ...]}, ...]}
"""

import json
import os
from collections.abc import Iterable, Sequence
from dataclasses import dataclass, field
from functools import cached_property
from typing import Optional, Union

import numpy as np
import pandas as pd

from ppgen import dlog
from ppgen.errors import DataValidationError, SchemaError
from ppgen.features.composites import apply_composites
from ppgen.features.schema import VariableSchema, load_schema
from ppgen.util import check_format_version

DATA_FORMAT_VERSION = "1.0"
ROLES = ("generation", "validation")


def _frozen(arr: np.ndarray) -> np.ndarray:
    arr.setflags(write=False)
    return arr


@dataclass(frozen=True, eq=False)
class ExplanatoryVector:
    """``l (+) b``: Likert values (length L) and binary bits (length B)."""

    likert: np.ndarray
    binary: np.ndarray

    def as_array(self) -> np.ndarray:
        return np.concatenate([self.likert, self.binary.astype(float)])

    def __eq__(self, other):
        if not isinstance(other, ExplanatoryVector):
            return NotImplemented
        return np.array_equal(self.likert, other.likert) and np.array_equal(
            self.binary, other.binary
        )


@dataclass(frozen=True)
class Violation:
    """A Likert variable without exactly one set level."""

    variable: str
    count: int

    def as_dict(self) -> dict:
        return {"variable": self.variable, "count": self.count}


@dataclass(frozen=True, eq=False)
class ParticipantRecord:
    id: str
    traits: np.ndarray
    explanatory: ExplanatoryVector


def _as_bits(schema: VariableSchema, traits) -> np.ndarray:
    bits = np.asarray(traits)
    if bits.ndim != 1 or bits.shape[0] != schema.trait_count:
        raise SchemaError(
            f"trait vector has length {bits.shape[0] if bits.ndim == 1 else bits.shape}, "
            f"expected {schema.trait_count}"
        )
    if not np.isin(bits, (0, 1)).all():
        raise SchemaError("trait vector entries must be 0 or 1")
    return bits.astype(np.uint8)


def validate_record(schema: VariableSchema, traits) -> list[Violation]:
    """List the Likert variables that do not have exactly one set level.

    Parameters
    ----------
    schema : VariableSchema
        the variable schema
    traits : array_like
        bit vector of length T

    Returns
    -------
    list of Violation
        empty iff the record is valid
    """
    bits = _as_bits(schema, traits)
    violations = []
    for var, cols in zip(schema.likert, schema.likert_level_columns):
        count = int(bits[cols].sum())
        if count != 1:
            violations.append(Violation(var.id, count))
    return violations


def _explanatory_from_bits(
    schema: VariableSchema, bits: np.ndarray, allow_empty: bool = False
) -> ExplanatoryVector:
    likert = np.zeros(schema.L, dtype=float)
    for kk, (var, cols) in enumerate(zip(schema.likert, schema.likert_level_columns)):
        set_levels = np.flatnonzero(bits[cols])
        if set_levels.size == 1:
            likert[kk] = var.level_values()[set_levels[0]]
        elif not (allow_empty and set_levels.size == 0):
            raise DataValidationError(
                f"variable {var.id} has {set_levels.size} set levels",
                details=[Violation(var.id, int(set_levels.size)).as_dict()],
            )
    binary = bits[schema.binary_columns].astype(np.uint8)
    return ExplanatoryVector(_frozen(likert), _frozen(binary))


def to_explanatory(schema: VariableSchema, traits) -> ExplanatoryVector:
    """Convert a trait bit vector to ``p' = l (+) b``.

    The set level ``j`` of an ``m``-level Likert variable maps to
    ``min + j * (max - min) / (m - 1)``; binary entries copy their trait bit.

    Raises
    ------
    DataValidationError
        if any Likert variable has zero or several set levels
    """
    return _explanatory_from_bits(schema, _as_bits(schema, traits))


@dataclass(frozen=True, eq=False)
class Dataset:
    """Validated participants sharing one schema.

    ``keep`` is the set of retained trait indices after :func:`mask_traits`,
    ``None`` when no mask was applied.
    """

    schema: VariableSchema
    participants: tuple[ParticipantRecord, ...]
    role: str = "generation"
    keep: Optional[frozenset[int]] = field(default=None)

    def __post_init__(self):
        if self.role not in ROLES:
            raise ValueError(f"unknown dataset role {self.role!r}")
        ids = [pp.id for pp in self.participants]
        if len(set(ids)) != len(ids):
            dup = sorted({ii for ii in ids if ids.count(ii) > 1})
            raise DataValidationError(
                f"duplicate participant IDs: {dup}", details={"duplicates": dup}
            )

    def __len__(self) -> int:
        return len(self.participants)

    @property
    def ids(self) -> list[str]:
        return [pp.id for pp in self.participants]

    @cached_property
    def trait_matrix(self) -> np.ndarray:
        """n x T matrix of trait bits."""
        if not self.participants:
            return _frozen(np.zeros((0, self.schema.trait_count), dtype=np.uint8))
        return _frozen(np.vstack([pp.traits for pp in self.participants]))

    @cached_property
    def likert_matrix(self) -> np.ndarray:
        """n x L matrix of Likert values."""
        if not self.participants:
            return _frozen(np.zeros((0, self.schema.L)))
        return _frozen(np.vstack([pp.explanatory.likert for pp in self.participants]))

    @cached_property
    def binary_matrix(self) -> np.ndarray:
        """n x B matrix of binary-variable bits."""
        if not self.participants:
            return _frozen(np.zeros((0, self.schema.B), dtype=np.uint8))
        return _frozen(np.vstack([pp.explanatory.binary for pp in self.participants]))

    @property
    def active_traits(self) -> frozenset[int]:
        if self.keep is None:
            return frozenset(range(1, self.schema.trait_count + 1))
        return self.keep

    def subset(self, indices: Iterable[int]) -> "Dataset":
        """Participants at the given (zero-based) positions, schema and mask kept."""
        return Dataset(
            schema=self.schema,
            participants=tuple(self.participants[ii] for ii in indices),
            role=self.role,
            keep=self.keep,
        )

    @classmethod
    def from_trait_matrix(
        cls,
        schema: VariableSchema,
        ids: Sequence[str],
        matrix,
        role: str = "generation",
    ) -> "Dataset":
        """Build a dataset from an n x T bit matrix, validating every row."""
        matrix = np.asarray(matrix)
        if matrix.ndim != 2 or matrix.shape[0] != len(ids):
            raise SchemaError("trait matrix must have one row per participant ID")
        records = []
        for pid, row in zip(ids, matrix):
            bits = _frozen(_as_bits(schema, row).copy())
            records.append(ParticipantRecord(str(pid), bits, to_explanatory(schema, bits)))
        return cls(schema=schema, participants=tuple(records), role=role)


def _is_bit(cell: str) -> bool:
    return cell.strip() in ("0", "1")


def _read_csv_rows(schema: VariableSchema, data_file: str) -> list[tuple[str, np.ndarray]]:
    skip = 0
    with open(data_file) as fp:
        for line in fp:
            if not line.startswith("#"):
                break
            key, _, value = line.lstrip("#").partition(":")
            if key.strip() == "format_version":
                check_format_version(value.strip(), DATA_FORMAT_VERSION, "data file")
            skip += 1
    try:
        table = pd.read_csv(
            data_file,
            header=None,
            skiprows=skip,
            dtype=str,
            skipinitialspace=True,
            keep_default_na=False,
        )
    except pd.errors.EmptyDataError:
        return []
    if table.shape[1] != schema.trait_count + 1:
        raise SchemaError(
            f"{data_file}: expected 1 ID column and {schema.trait_count} trait columns, "
            f"found {table.shape[1]} columns"
        )
    # a first row of 0/1 trait cells is a participant, not a header
    if not all(_is_bit(cc) for cc in table.iloc[0, 1:]):
        table = table.iloc[1:]
    ids = [pid.strip() for pid in table.iloc[:, 0].astype(str)]
    try:
        values = table.iloc[:, 1:].astype(int).to_numpy()
    except ValueError as e:
        raise SchemaError(f"{data_file}: trait columns must be 0/1") from e
    if not np.isin(values, (0, 1)).all():
        raise SchemaError(f"{data_file}: trait columns must be 0/1")
    return [(pid, row.astype(np.uint8)) for pid, row in zip(ids, values)]


def _read_json_rows(schema: VariableSchema, data_file: str) -> list[tuple[str, np.ndarray]]:
    with open(data_file) as fp:
        data = json.load(fp)
    if isinstance(data, dict):
        check_format_version(
            data.get("format_version", DATA_FORMAT_VERSION),
            DATA_FORMAT_VERSION,
            "data file",
        )
        data = data.get("participants")
    if not isinstance(data, list):
        raise SchemaError(f"{data_file}: expected a list of participants")
    rows = []
    for item in data:
        try:
            pid = str(item["id"])
            set_traits = [int(tt) for tt in item["set_traits"]]
        except (KeyError, TypeError, ValueError) as e:
            raise SchemaError(f"{data_file}: malformed participant {item!r}") from e
        bits = np.zeros(schema.trait_count, dtype=np.uint8)
        for tt in set_traits:
            if not 1 <= tt <= schema.trait_count:
                raise SchemaError(f"{data_file}: participant {pid} has unknown trait {tt}")
            bits[tt - 1] = 1
        rows.append((pid, bits))
    return rows


def read_trait_rows(
    schema: VariableSchema, data_file: Union[str, os.PathLike]
) -> list[tuple[str, np.ndarray]]:
    """Read ``(participant id, trait bits)`` pairs without validating Likert levels."""
    data_file = str(data_file)
    if not os.path.isfile(data_file):
        raise SchemaError(f"data file {data_file} does not exist")
    try:
        if data_file.endswith(".json"):
            return _read_json_rows(schema, data_file)
        return _read_csv_rows(schema, data_file)
    except (pd.errors.ParserError, json.JSONDecodeError, UnicodeDecodeError) as e:
        raise SchemaError(f"{data_file}: malformed file: {e}") from e


def load_dataset(
    schema_file: Union[str, os.PathLike, VariableSchema],
    data_file: Union[str, os.PathLike],
    role: str = "generation",
    drop_invalid: bool = False,
    derive_composites: bool = False,
) -> Dataset:
    """Load and validate a dataset.

    Parameters
    ----------
    schema_file : str, os.PathLike or VariableSchema
        schema file, or an already loaded schema
    data_file : str or os.PathLike
        CSV or JSON data file
    role : str
        ``generation`` or ``validation``
    drop_invalid : bool
        drop records with Likert violations (with a warning) instead of failing
    derive_composites : bool
        recompute the composite Likert variables from the raw answers instead
        of reading their columns; records whose answers do not allow it are
        left to validation

    Returns
    -------
    Dataset
        the validated dataset

    Raises
    ------
    SchemaError
        malformed file, unknown trait, or wrong trait count
    DataValidationError
        invalid records (unless dropped) or duplicate participant IDs
    """
    schema = (
        schema_file
        if isinstance(schema_file, VariableSchema)
        else load_schema(schema_file)
    )
    records = []
    diagnostics = []
    for pid, bits in read_trait_rows(schema, data_file):
        if derive_composites:
            try:
                bits = apply_composites(schema, bits)
            except ValueError:
                # the invalid answer is reported by validate_record
                pass
        violations = validate_record(schema, bits)
        if violations:
            diagnostics.append(
                {"id": pid, "violations": [vv.as_dict() for vv in violations]}
            )
            continue
        bits = _frozen(bits)
        records.append(ParticipantRecord(pid, bits, to_explanatory(schema, bits)))
    if diagnostics:
        if not drop_invalid:
            raise DataValidationError(
                f"{len(diagnostics)} invalid participant record(s) in {data_file}",
                details=diagnostics,
            )
        for dd in diagnostics:
            dlog.warning(
                "dropping participant %s: %s",
                dd["id"],
                ", ".join(f"{vv['variable']} has {vv['count']} set levels" for vv in dd["violations"]),
            )
    dataset = Dataset(schema=schema, participants=tuple(records), role=role)
    dlog.info("loaded %d %s participants from %s", len(dataset), role, data_file)
    return dataset


def mask_traits(dataset: Dataset, keep: Iterable[int]) -> Dataset:
    """Zero every trait outside ``keep`` in both ``p`` and ``p'``.

    Likert variables whose levels are all masked contribute 0 to ``l``; the
    returned dataset remembers ``keep`` so distances can drop their range from
    the normalizer. Masking is idempotent.
    """
    schema = dataset.schema
    keep = frozenset(int(tt) for tt in keep)
    unknown = [tt for tt in keep if not 1 <= tt <= schema.trait_count]
    if unknown:
        raise SchemaError(f"unknown traits in keep set: {sorted(unknown)}")
    if dataset.keep is not None:
        keep = keep & dataset.keep
    column_mask = np.zeros(schema.trait_count, dtype=np.uint8)
    column_mask[[tt - 1 for tt in keep]] = 1
    records = []
    for pp in dataset.participants:
        bits = _frozen(pp.traits * column_mask)
        records.append(
            ParticipantRecord(pp.id, bits, _explanatory_from_bits(schema, bits, True))
        )
    return Dataset(
        schema=schema, participants=tuple(records), role=dataset.role, keep=keep
    )


def write_dataset_csv(dataset: Dataset, data_file: Union[str, os.PathLike]):
    """Write the trait bits of a dataset in the CSV data format."""
    frame = pd.DataFrame(
        dataset.trait_matrix.astype(int),
        columns=[f"t{ii}" for ii in range(1, dataset.schema.trait_count + 1)],
    )
    frame.insert(0, "id", dataset.ids)
    with open(data_file, "w") as fp:
        fp.write(f"# format_version: {DATA_FORMAT_VERSION}\n")
        frame.to_csv(fp, index=False)
