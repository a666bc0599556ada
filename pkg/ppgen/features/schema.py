"""Variable schema: how traits group into Likert-scale and binary variables.

A schema partitions the trait indices ``1..T`` into explanatory variables.
A Likert variable owns an ordered list of mutually exclusive traits (its
levels) spread evenly over a numeric range; a binary variable owns exactly
one trait. Schemas are data, stored as JSON::

    {
        "format_version": "1.0",
        "trait_count": 133,
        "traits": [{"index": 1, "label": "..."}, ...],
        "variables": [
            {"id": "l_1", "kind": "likert", "trait_levels": [1, 2, 3],
             "numeric_range": [0, 1], "source": "open_question"},
            {"id": "b_1", "kind": "binary", "trait_levels": [67],
             "source": "open_question"},
            ...
        ]
    }
"""

import os
from dataclasses import dataclass, field
from functools import cached_property
from pathlib import Path
from typing import Optional, Union

import numpy as np

from ppgen.errors import SchemaError
from ppgen.util import check_format_version, load_file

SCHEMA_FORMAT_VERSION = "1.0"
LIKERT = "likert"
BINARY = "binary"
VARIABLE_KINDS = (LIKERT, BINARY)
VARIABLE_SOURCES = ("closed_question", "open_question", "composite")

REFERENCE_SCHEMA_PATH = Path(__file__).parent / "data" / "reference_schema.json"


@dataclass(frozen=True)
class TraitId:
    index: int
    label: str = ""


@dataclass(frozen=True)
class VariableDef:
    """One explanatory variable.

    Parameters
    ----------
    id : str
        symbol such as ``l_3`` or ``b_17``
    kind : str
        ``likert`` or ``binary``
    trait_levels : tuple of int
        trait indices in ascending semantic order (a single index for binary)
    numeric_range : tuple of float, optional
        ``(min, max)`` of a Likert variable
    source : str
        ``closed_question``, ``open_question`` or ``composite``
    label : str
        human-readable name
    """

    id: str
    kind: str
    trait_levels: tuple[int, ...]
    numeric_range: Optional[tuple[float, float]] = None
    source: str = "open_question"
    label: str = ""

    def __post_init__(self):
        if self.kind not in VARIABLE_KINDS:
            raise SchemaError(f"variable {self.id}: unknown kind {self.kind!r}")
        if self.source not in VARIABLE_SOURCES:
            raise SchemaError(f"variable {self.id}: unknown source {self.source!r}")
        if self.kind == LIKERT:
            if len(self.trait_levels) < 2:
                raise SchemaError(
                    f"variable {self.id}: a Likert variable needs at least 2 levels"
                )
            if self.numeric_range is None:
                raise SchemaError(f"variable {self.id}: numeric_range is required")
            lo, hi = self.numeric_range
            if not hi > lo:
                raise SchemaError(
                    f"variable {self.id}: numeric_range must satisfy min < max"
                )
        else:
            if len(self.trait_levels) != 1:
                raise SchemaError(
                    f"variable {self.id}: a binary variable has exactly one trait"
                )
            if self.numeric_range is not None:
                raise SchemaError(
                    f"variable {self.id}: numeric_range is only valid for Likert variables"
                )

    @property
    def is_likert(self) -> bool:
        return self.kind == LIKERT

    @property
    def range_width(self) -> float:
        """r(l_k) = max - min; 1 for binary variables."""
        if self.numeric_range is None:
            return 1.0
        return float(self.numeric_range[1] - self.numeric_range[0])

    def level_values(self) -> np.ndarray:
        """Numeric value of every level: ``min + j * (max - min) / (m - 1)``."""
        lo, hi = self.numeric_range
        m = len(self.trait_levels)
        return lo + np.arange(m, dtype=float) * (hi - lo) / (m - 1)

    def as_dict(self) -> dict:
        ret = {
            "id": self.id,
            "kind": self.kind,
            "trait_levels": list(self.trait_levels),
            "source": self.source,
        }
        if self.numeric_range is not None:
            ret["numeric_range"] = list(self.numeric_range)
        if self.label:
            ret["label"] = self.label
        return ret

    @classmethod
    def from_dict(cls, data: dict) -> "VariableDef":
        try:
            levels = data["trait_levels"]
            if isinstance(levels, int):
                levels = [levels]
            rng = data.get("numeric_range")
            return cls(
                id=str(data["id"]),
                kind=str(data["kind"]),
                trait_levels=tuple(int(ii) for ii in levels),
                numeric_range=None if rng is None else (float(rng[0]), float(rng[1])),
                source=str(data.get("source", "open_question")),
                label=str(data.get("label", "")),
            )
        except (KeyError, TypeError, IndexError) as e:
            raise SchemaError(f"malformed variable definition: {data!r}") from e


@dataclass(frozen=True)
class VariableSchema:
    """Ordered explanatory variables partitioning the traits ``1..T``."""

    variables: tuple[VariableDef, ...]
    trait_count: int
    trait_labels: tuple[str, ...] = field(default=(), compare=False)

    def __post_init__(self):
        seen = {}
        ids = set()
        for var in self.variables:
            if var.id in ids:
                raise SchemaError(f"duplicate variable id {var.id}")
            ids.add(var.id)
            for tt in var.trait_levels:
                if not 1 <= tt <= self.trait_count:
                    raise SchemaError(
                        f"variable {var.id}: trait {tt} outside 1..{self.trait_count}"
                    )
                if tt in seen:
                    raise SchemaError(
                        f"trait {tt} belongs to both {seen[tt]} and {var.id}"
                    )
                seen[tt] = var.id
        missing = sorted(set(range(1, self.trait_count + 1)) - set(seen))
        if missing:
            raise SchemaError(
                f"traits not assigned to any variable: {missing[:10]}",
                details={"missing": missing},
            )
        if self.trait_labels and len(self.trait_labels) != self.trait_count:
            raise SchemaError("trait label count differs from trait_count")

    @property
    def T(self) -> int:
        return self.trait_count

    @cached_property
    def likert(self) -> tuple[VariableDef, ...]:
        return tuple(vv for vv in self.variables if vv.is_likert)

    @cached_property
    def binary(self) -> tuple[VariableDef, ...]:
        return tuple(vv for vv in self.variables if not vv.is_likert)

    @property
    def L(self) -> int:
        return len(self.likert)

    @property
    def B(self) -> int:
        return len(self.binary)

    @property
    def E(self) -> int:
        return self.L + self.B

    @cached_property
    def _by_id(self) -> dict[str, VariableDef]:
        return {vv.id: vv for vv in self.variables}

    def variable(self, var_id: str) -> VariableDef:
        try:
            return self._by_id[var_id]
        except KeyError as e:
            raise SchemaError(f"unknown variable {var_id}") from e

    @cached_property
    def trait_variable(self) -> dict[int, VariableDef]:
        """Map every trait index to the variable owning it."""
        return {tt: vv for vv in self.variables for tt in vv.trait_levels}

    def trait(self, index: int) -> TraitId:
        if not 1 <= index <= self.trait_count:
            raise SchemaError(f"unknown trait {index}")
        label = self.trait_labels[index - 1] if self.trait_labels else ""
        return TraitId(index, label)

    @cached_property
    def likert_level_columns(self) -> tuple[np.ndarray, ...]:
        """Zero-based trait columns of every Likert variable, in level order."""
        return tuple(
            np.asarray(vv.trait_levels, dtype=int) - 1 for vv in self.likert
        )

    @cached_property
    def binary_columns(self) -> np.ndarray:
        """Zero-based trait column of every binary variable, in schema order."""
        return np.asarray([vv.trait_levels[0] for vv in self.binary], dtype=int) - 1

    def as_dict(self) -> dict:
        ret = {
            "format_version": SCHEMA_FORMAT_VERSION,
            "trait_count": self.trait_count,
            "variables": [vv.as_dict() for vv in self.variables],
        }
        if self.trait_labels:
            ret["traits"] = [
                {"index": ii + 1, "label": ll} for ii, ll in enumerate(self.trait_labels)
            ]
        return ret

    @classmethod
    def from_dict(cls, data: dict) -> "VariableSchema":
        if not isinstance(data, dict):
            raise SchemaError("schema must be a JSON object")
        check_format_version(
            data.get("format_version", SCHEMA_FORMAT_VERSION),
            SCHEMA_FORMAT_VERSION,
            "schema",
        )
        try:
            trait_count = int(data["trait_count"])
            variables = tuple(VariableDef.from_dict(vv) for vv in data["variables"])
        except (KeyError, TypeError, ValueError) as e:
            raise SchemaError("schema needs trait_count and variables") from e
        labels = ()
        if "traits" in data:
            by_index = {int(tt["index"]): str(tt.get("label", "")) for tt in data["traits"]}
            labels = tuple(by_index.get(ii, "") for ii in range(1, trait_count + 1))
        return cls(variables=variables, trait_count=trait_count, trait_labels=labels)


def load_schema(filename: Union[str, os.PathLike]) -> VariableSchema:
    """Load a variable schema from a JSON or YAML file."""
    try:
        data = load_file(filename)
    except (OSError, ValueError) as e:
        raise SchemaError(f"cannot read schema {filename}: {e}") from e
    return VariableSchema.from_dict(data)


def reference_schema() -> VariableSchema:
    """The shipped 133-trait schema: 14 Likert and 67 binary variables."""
    return load_schema(REFERENCE_SCHEMA_PATH)
