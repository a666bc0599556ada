"""Persona exports: JSON, Markdown report and per-variable summaries."""

import os
from typing import Union

import numpy as np
import pandas as pd
from monty.serialization import dumpfn, loadfn

from ppgen.cluster.diana import ClusterNode, descriptor
from ppgen.errors import SchemaError
from ppgen.features.dataset import Dataset
from ppgen.persona.prune import PersonaSet
from ppgen.util import check_format_version

PERSONA_FORMAT_VERSION = "1.0"


def persona_set_to_dict(personas: PersonaSet, dataset: Dataset) -> dict:
    ids = dataset.ids
    return {
        "format_version": PERSONA_FORMAT_VERSION,
        "alpha": personas.alpha,
        "family_size": personas.family_size,
        "correction": personas.correction,
        "traits": list(personas.traits),
        "personas": [
            {
                "id": ll.persona_id,
                "node": list(ll.id),
                "size": ll.size,
                "members": list(ll.members),
                "member_ids": [ids[ii] for ii in ll.members],
                "descriptor": [float(ff) for ff in ll.descriptor],
            }
            for ll in personas.leaves
        ],
        "pairwise": [rr.as_dict() for _, rr in sorted(personas.pairwise_reports.items())],
        "ci_overlap": [cc.as_dict() for _, cc in sorted(personas.ci_overlap.items())],
    }


def save_persona_set(personas: PersonaSet, dataset: Dataset, path: Union[str, os.PathLike]):
    dumpfn(persona_set_to_dict(personas, dataset), str(path), indent=2)


def load_persona_set(path: Union[str, os.PathLike], dataset: Dataset) -> PersonaSet:
    """Load exported personas; descriptors are recomputed from ``dataset``.

    Pairwise reports are not restored.
    """
    data = loadfn(str(path))
    check_format_version(
        data.get("format_version", PERSONA_FORMAT_VERSION), PERSONA_FORMAT_VERSION, "persona set"
    )
    leaves = []
    try:
        for item in data["personas"]:
            members = tuple(int(ii) for ii in item["members"])
            if "member_ids" in item:
                known = dataset.ids
                if any(ii >= len(known) or known[ii] != pid for ii, pid in zip(members, item["member_ids"])):
                    raise SchemaError(f"persona {item['id']} members differ from the dataset")
            leaves.append(
                ClusterNode(
                    (int(item["node"][0]), int(item["node"][1])),
                    members,
                    descriptor(members, dataset),
                )
            )
        traits = tuple(int(tt) for tt in data["traits"])
        alpha = float(data["alpha"])
        family = int(data["family_size"])
        correction = str(data.get("correction", "holm"))
    except (KeyError, TypeError, IndexError, ValueError) as e:
        raise SchemaError(f"malformed persona file {path}") from e
    return PersonaSet(
        sorted(leaves, key=lambda ll: ll.min_member), traits, alpha, family, correction=correction
    )


def persona_variable_summary(personas: PersonaSet, dataset: Dataset) -> pd.DataFrame:
    """Mean and standard deviation of every Likert variable per persona.

    Values are rescaled to [0, 1] by the variable range. ``dataset`` should be
    the unmasked dataset.
    """
    schema = dataset.schema
    lo = np.array([vv.numeric_range[0] for vv in schema.likert])
    width = np.array([vv.range_width for vv in schema.likert])
    scaled = (dataset.likert_matrix - lo) / width
    rows = []
    for leaf in personas.leaves:
        values = scaled[list(leaf.members)]
        for kk, var in enumerate(schema.likert):
            rows.append(
                {
                    "persona": leaf.persona_id,
                    "variable": var.id,
                    "label": var.label,
                    "mean": float(values[:, kk].mean()),
                    "std": float(values[:, kk].std()),
                }
            )
    return pd.DataFrame(rows, columns=["persona", "variable", "label", "mean", "std"])


def _trait_label(dataset: Dataset, index: int) -> str:
    label = dataset.schema.trait(index).label
    return label or f"t{index}"


def _persona_section(leaf: ClusterNode, dataset: Dataset, summary: pd.DataFrame) -> list[str]:
    schema = dataset.schema
    lines = [f"## Persona {leaf.persona_id} ({leaf.label}, {leaf.size} participants)", ""]
    lines += ["| variable | trait | frequency |", "|---|---|---|"]
    for var in schema.variables:
        if var.is_likert:
            stats = summary[(summary.persona == leaf.persona_id) & (summary.variable == var.id)]
            head = f"{var.id}"
            if not stats.empty:
                head += f" (mean {stats['mean'].iloc[0]:.2f}, sd {stats['std'].iloc[0]:.2f})"
            for tt in var.trait_levels:
                lines.append(f"| {head} | {_trait_label(dataset, tt)} | {leaf.descriptor[tt - 1]:.2f} |")
                head = ""
        else:
            tt = var.trait_levels[0]
            freq = leaf.descriptor[tt - 1]
            if freq > 0:
                lines.append(f"| {var.id} | {_trait_label(dataset, tt)} | {freq:.2f} |")
    lines.append("")
    return lines


def persona_report_markdown(personas: PersonaSet, dataset: Dataset) -> str:
    """Trait frequencies of every persona grouped by explanatory variable.

    Binary traits absent from a persona are left out.
    """
    summary = persona_variable_summary(personas, dataset)
    lines = [
        "# Personas",
        "",
        f"{len(personas)} personas over {len(dataset)} participants, "
        f"{len(personas.traits)} discriminative traits, alpha = {personas.alpha}.",
        "",
    ]
    for leaf in personas.leaves:
        lines += _persona_section(leaf, dataset, summary)
    if personas.pairwise_reports:
        lines += ["## Pairwise differences", "", "| pair | rejected traits | min p |", "|---|---|---|"]
        for rr in (personas.pairwise_reports[kk] for kk in sorted(personas.pairwise_reports)):
            rejected = ", ".join(f"t{tt}" for tt in rr.rejected_traits) or "-"
            lines.append(
                f"| {rr.a[0]}.{rr.a[1]} vs {rr.b[0]}.{rr.b[1]} | {rejected} | {rr.min_p:.3g} |"
            )
        lines.append("")
    return "\n".join(lines)


def write_persona_report(personas: PersonaSet, dataset: Dataset, path: Union[str, os.PathLike]):
    with open(path, "w") as fp:
        fp.write(persona_report_markdown(personas, dataset))
