"""Projection of participants and personas onto interpretable attribute axes.

An axis is a convex combination of Likert variables, each rescaled to [0, 1]
by its range, so every projected point lies in the unit square. A persona is
placed at the mean of its members. Specs are data and can be loaded from
JSON::

    {"format_version": "1.0",
     "specs": [{"name": "knowledge",
                "x": {"l_6": 0.3333333333333333, "l_7": 0.3333333333333333,
                      "l_8": 0.3333333333333333},
                "y": {"l_1": 1.0}}]}
"""

import os
from dataclasses import dataclass
from typing import Optional, Union

import numpy as np
import pandas as pd

from ppgen.arginfo import projection_jdata_arginfo
from ppgen.errors import SchemaError
from ppgen.features.dataset import Dataset
from ppgen.features.schema import VariableSchema
from ppgen.persona.prune import PersonaSet
from ppgen.util import check_format_version, load_file, normalize

PROJECTION_FORMAT_VERSION = "1.0"
WEIGHT_ATOL = 1e-9


@dataclass(frozen=True)
class Axis:
    """Non-negative weights over Likert variable IDs, summing to 1."""

    weights: tuple[tuple[str, float], ...]

    def __post_init__(self):
        if not self.weights:
            raise SchemaError("an axis needs at least one variable")
        if any(ww < 0 for _, ww in self.weights):
            raise SchemaError(f"axis weights must be non-negative: {self.weights}")
        if abs(sum(ww for _, ww in self.weights) - 1.0) > WEIGHT_ATOL:
            raise SchemaError(f"axis weights must sum to 1: {self.weights}")

    @classmethod
    def mean_of(cls, *var_ids: str) -> "Axis":
        return cls(tuple((vv, 1.0 / len(var_ids)) for vv in var_ids))

    def as_dict(self) -> dict:
        return dict(self.weights)


@dataclass(frozen=True)
class ProjectionSpec:
    name: str
    x_axis: Axis
    y_axis: Axis

    def check(self, schema: VariableSchema):
        """Raise SchemaError unless every axis variable is a Likert variable of ``schema``."""
        for var_id, _ in self.x_axis.weights + self.y_axis.weights:
            var = schema.variable(var_id)
            if not var.is_likert:
                raise SchemaError(f"projection {self.name}: {var_id} is not a Likert variable")

    def as_dict(self) -> dict:
        return {"name": self.name, "x": self.x_axis.as_dict(), "y": self.y_axis.as_dict()}

    @classmethod
    def from_dict(cls, data: dict) -> "ProjectionSpec":
        try:
            return cls(
                str(data["name"]),
                Axis(tuple((str(kk), float(vv)) for kk, vv in data["x"].items())),
                Axis(tuple((str(kk), float(vv)) for kk, vv in data["y"].items())),
            )
        except (KeyError, TypeError, AttributeError, ValueError) as e:
            raise SchemaError(f"malformed projection spec {data!r}") from e


@dataclass(frozen=True)
class ProjectedPoint:
    entity_id: str
    x: float
    y: float
    spec_name: str


def builtin_specs() -> list[ProjectionSpec]:
    """Knowledge, behaviour, PET decision, PET efficacy, importance and its change.

    The x axis is the named dimension; the y axis is knowledge, or behaviour
    for the knowledge projection itself.
    """
    knowledge = Axis.mean_of("l_6", "l_7", "l_8")
    behaviour = Axis.mean_of("l_1")
    return [
        ProjectionSpec("knowledge", knowledge, behaviour),
        ProjectionSpec("behaviour", behaviour, knowledge),
        ProjectionSpec("pet_decision", Axis.mean_of("l_11"), knowledge),
        ProjectionSpec("pet_efficacy", Axis.mean_of("l_10"), knowledge),
        ProjectionSpec("importance", Axis.mean_of("l_3", "l_12"), knowledge),
        ProjectionSpec("importance_change", Axis.mean_of("l_13"), knowledge),
    ]


def load_projection_specs(filename: Union[str, os.PathLike]) -> list[ProjectionSpec]:
    try:
        data = load_file(filename)
    except (OSError, ValueError) as e:
        raise SchemaError(f"cannot read projection specs {filename}: {e}") from e
    if isinstance(data, list):
        data = {"specs": data}
    try:
        data = normalize(projection_jdata_arginfo(), data)
    except Exception as e:
        raise SchemaError(f"invalid projection specs {filename}: {e}") from e
    check_format_version(data["format_version"], PROJECTION_FORMAT_VERSION, "projection specs")
    data = data["specs"]
    return [ProjectionSpec.from_dict(dd) for dd in data]


def find_spec(name: str, specs: Optional[list[ProjectionSpec]] = None) -> ProjectionSpec:
    for spec in builtin_specs() if specs is None else specs:
        if spec.name == name:
            return spec
    raise SchemaError(f"unknown projection {name!r}")


def _axis_values(axis: Axis, schema: VariableSchema, scaled: np.ndarray) -> np.ndarray:
    position = {vv.id: kk for kk, vv in enumerate(schema.likert)}
    ret = np.zeros(scaled.shape[0])
    for var_id, weight in axis.weights:
        ret += weight * scaled[:, position[var_id]]
    return ret


def participant_points(dataset: Dataset, spec: ProjectionSpec) -> tuple[np.ndarray, np.ndarray]:
    """x and y of every participant."""
    schema = dataset.schema
    spec.check(schema)
    lo = np.array([vv.numeric_range[0] for vv in schema.likert])
    width = np.array([vv.range_width for vv in schema.likert])
    scaled = (dataset.likert_matrix - lo) / width
    xs = np.clip(_axis_values(spec.x_axis, schema, scaled), 0.0, 1.0)
    ys = np.clip(_axis_values(spec.y_axis, schema, scaled), 0.0, 1.0)
    return xs, ys


def project(
    target: Union[PersonaSet, Dataset],
    spec: ProjectionSpec,
    dataset: Optional[Dataset] = None,
) -> list[ProjectedPoint]:
    """Project participants, or personas at the mean of their members.

    Parameters
    ----------
    target : PersonaSet or Dataset
        entities to project
    spec : ProjectionSpec
        the axes
    dataset : Dataset, optional
        the unmasked participants, required for a PersonaSet

    Returns
    -------
    list of ProjectedPoint
        one point per participant or persona

    Raises
    ------
    SchemaError
        if the spec names an unknown or non-Likert variable
    """
    if isinstance(target, Dataset):
        xs, ys = participant_points(target, spec)
        return [
            ProjectedPoint(pid, float(xx), float(yy), spec.name)
            for pid, xx, yy in zip(target.ids, xs, ys)
        ]
    if dataset is None:
        raise ValueError("projecting personas needs the participant dataset")
    xs, ys = participant_points(dataset, spec)
    ret = []
    for leaf in target.leaves:
        members = list(leaf.members)
        ret.append(
            ProjectedPoint(
                leaf.persona_id, float(xs[members].mean()), float(ys[members].mean()), spec.name
            )
        )
    return ret


def points_frame(points: list[ProjectedPoint]) -> pd.DataFrame:
    return pd.DataFrame(
        [(pp.entity_id, pp.x, pp.y, pp.spec_name) for pp in points],
        columns=["entity_id", "x", "y", "spec_name"],
    )


def write_projection_csv(points: list[ProjectedPoint], path: Union[str, os.PathLike]):
    points_frame(points).to_csv(path, index=False, float_format="%.17g")
