"""Dendrogram serialization and descriptor tables."""

import os
from typing import Union

import numpy as np
import pandas as pd
from monty.serialization import dumpfn, loadfn

from ppgen.cluster.diana import ClusterNode, Dendrogram, descriptor
from ppgen.errors import SchemaError
from ppgen.features.dataset import Dataset
from ppgen.util import check_format_version

DENDROGRAM_FORMAT_VERSION = "1.0"


def _node_to_dict(node: ClusterNode) -> dict:
    return {
        "id": list(node.id),
        "label": node.label,
        "members": list(node.members),
        "split_order": node.split_order,
        "children": [_node_to_dict(cc) for cc in node.children],
    }


def dendrogram_to_dict(dendrogram: Dendrogram, ids=None) -> dict:
    """JSON tree ``{id, members, split_order, children}`` plus the split log."""
    ret = {
        "format_version": DENDROGRAM_FORMAT_VERSION,
        "n": dendrogram.n,
        "split_rule": dendrogram.split_rule,
        "rng_seed": dendrogram.rng_seed,
        "split_log": [
            {"parent": list(parent), "children": [list(cc) for cc in children]}
            for parent, children in dendrogram.split_log
        ],
        "root": _node_to_dict(dendrogram.root),
    }
    if ids is not None:
        ret["participant_ids"] = list(ids)
    return ret


def _node_from_dict(data: dict, dataset: Dataset) -> ClusterNode:
    members = tuple(int(ii) for ii in data["members"])
    return ClusterNode(
        id=(int(data["id"][0]), int(data["id"][1])),
        members=members,
        descriptor=descriptor(members, dataset),
        children=[_node_from_dict(cc, dataset) for cc in data.get("children", [])],
        split_order=int(data.get("split_order", -1)),
    )


def dendrogram_from_dict(data: dict, dataset: Dataset) -> Dendrogram:
    """Rebuild a dendrogram; descriptors are recomputed from ``dataset``."""
    check_format_version(
        data.get("format_version", DENDROGRAM_FORMAT_VERSION),
        DENDROGRAM_FORMAT_VERSION,
        "dendrogram",
    )
    try:
        root = _node_from_dict(data["root"], dataset)
    except (KeyError, TypeError, IndexError) as e:
        raise SchemaError("malformed dendrogram file") from e
    if root.size != len(dataset):
        raise SchemaError(
            f"dendrogram covers {root.size} participants, dataset has {len(dataset)}"
        )
    stored_ids = data.get("participant_ids")
    if stored_ids is not None and list(stored_ids) != dataset.ids:
        raise SchemaError("dendrogram participant IDs differ from the dataset")
    split_log = [
        (tuple(ss["parent"]), tuple(tuple(cc) for cc in ss["children"]))
        for ss in data.get("split_log", [])
    ]
    return Dendrogram(
        root,
        split_log,
        rng_seed=int(data.get("rng_seed", 0)),
        split_rule=str(data.get("split_rule", "diameter")),
    )


def save_dendrogram(dendrogram: Dendrogram, path: Union[str, os.PathLike], ids=None):
    dumpfn(dendrogram_to_dict(dendrogram, ids), str(path), indent=2)


def load_dendrogram(path: Union[str, os.PathLike], dataset: Dataset) -> Dendrogram:
    return dendrogram_from_dict(loadfn(str(path)), dataset)


def descriptor_frame(nodes: list[ClusterNode], trait_count: int) -> pd.DataFrame:
    """Cluster rows by trait columns ``t1..tT``."""
    data = np.vstack([nn.descriptor for nn in nodes]) if nodes else np.zeros((0, trait_count))
    frame = pd.DataFrame(
        data,
        index=[nn.persona_id for nn in nodes],
        columns=[f"t{ii}" for ii in range(1, trait_count + 1)],
    )
    frame.insert(0, "size", [nn.size for nn in nodes])
    frame.index.name = "cluster"
    return frame


def write_descriptor_csv(nodes: list[ClusterNode], trait_count: int, path: Union[str, os.PathLike]):
    descriptor_frame(nodes, trait_count).to_csv(path, float_format="%.6g")
