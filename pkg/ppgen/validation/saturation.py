"""Saturation of the generation set.

A validation participant is an outlier when its distance to the closest
generation participant is unusually large compared with the nearest-neighbour
distances inside the generation set. Being closer than usual never makes a
participant an outlier, so only the upper fence decides.
"""

import os
from dataclasses import dataclass
from typing import Optional, Union

import numpy as np
from monty.serialization import dumpfn

from ppgen import dlog
from ppgen.distance.measure import cross_distance_matrix, distance_matrix
from ppgen.errors import DegenerateInputError
from ppgen.features.dataset import Dataset

TUKEY_K = 1.5
DECISION_RULES = ("tukey", "zscore")


@dataclass(frozen=True, eq=False)
class SaturationReport:
    """Nearest-neighbour distances, fences, z-scores and the outlier list.

    ``z_scores`` is ``None`` when the generation distances have zero
    variance.
    """

    d1: np.ndarray
    d2: np.ndarray
    z_scores: Optional[np.ndarray]
    tukey_fences: tuple[float, float]
    outliers: tuple[str, ...]
    gen_ids: tuple[str, ...]
    val_ids: tuple[str, ...]
    decision_rule: str = "tukey"
    z_max: float = 3.0

    def as_dict(self) -> dict:
        def summary(arr):
            return {
                "min": float(arr.min()),
                "q1": float(np.percentile(arr, 25)),
                "median": float(np.median(arr)),
                "q3": float(np.percentile(arr, 75)),
                "max": float(arr.max()),
                "mean": float(arr.mean()),
                "std": float(arr.std()),
            }

        return {
            "decision_rule": self.decision_rule,
            "z_max": self.z_max,
            "d1": {"summary": summary(self.d1), "values": dict(zip(self.gen_ids, self.d1.tolist()))},
            "d2": {"summary": summary(self.d2), "values": dict(zip(self.val_ids, self.d2.tolist()))},
            "tukey_fences": list(self.tukey_fences),
            "z_scores": None
            if self.z_scores is None
            else dict(zip(self.val_ids, self.z_scores.tolist())),
            "z_range": None
            if self.z_scores is None
            else [float(self.z_scores.min()), float(self.z_scores.max())],
            "outliers": list(self.outliers),
        }

    def write_json(self, path: Union[str, os.PathLike]):
        dumpfn(self.as_dict(), str(path), indent=2)


def saturation_check(
    gen: Dataset,
    val: Dataset,
    decision_rule: str = "tukey",
    z_max: float = 3.0,
    threads: int = 1,
) -> SaturationReport:
    """Nearest-neighbour outlier analysis of a validation set.

    Parameters
    ----------
    gen : Dataset
        generation set, at least two participants
    val : Dataset
        validation set on the same schema and trait mask
    decision_rule : str
        ``tukey``: outliers lie above ``Q3 + 1.5 IQR`` of the generation
        distances (linear-interpolation quartiles); ``zscore``: outliers have a
        z-score above ``z_max``
    z_max : float
        z-score bound of the ``zscore`` rule
    threads : int
        worker processes for the distance matrices

    Returns
    -------
    SaturationReport
        distances, fences, z-scores and outliers
    """
    if decision_rule not in DECISION_RULES:
        raise ValueError(f"decision_rule must be one of {DECISION_RULES}, got {decision_rule!r}")
    if len(gen) < 2:
        raise DegenerateInputError("saturation needs at least two generation participants")
    if len(val) == 0:
        raise DegenerateInputError("the validation set is empty")
    # self distances are forced to 1 so the minimum picks another participant
    d1 = distance_matrix(gen, diagonal_policy="one", threads=threads).values.min(axis=1)
    d2 = cross_distance_matrix(gen, val, threads=threads).min(axis=0)
    q1, q3 = np.percentile(d1, [25, 75])
    iqr = q3 - q1
    fences = (float(q1 - TUKEY_K * iqr), float(q3 + TUKEY_K * iqr))
    std = d1.std()
    z_scores = None if std == 0 else (d2 - d1.mean()) / std
    if decision_rule == "zscore":
        if z_scores is None:
            raise DegenerateInputError(
                "generation nearest-neighbour distances have zero variance, z-scores are undefined"
            )
        flagged = z_scores > z_max
    else:
        flagged = d2 > fences[1]
    if z_scores is None:
        dlog.warning("generation nearest-neighbour distances have zero variance, only fences are reported")
    outliers = tuple(pid for pid, ff in zip(val.ids, flagged) if ff)
    dlog.info("saturation: %d of %d validation participants are outliers", len(outliers), len(val))
    return SaturationReport(
        d1=d1,
        d2=d2,
        z_scores=z_scores,
        tukey_fences=fences,
        outliers=outliers,
        gen_ids=tuple(gen.ids),
        val_ids=tuple(val.ids),
        decision_rule=decision_rule,
        z_max=z_max,
    )
