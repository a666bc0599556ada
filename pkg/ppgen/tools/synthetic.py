"""Planted-archetype datasets with a known persona structure.

Each archetype sits at a corner of the Likert cube: Likert variable ``j`` is
at its highest level when bit ``j`` of the archetype index is set and at its
lowest level otherwise. Every archetype also owns a block of binary traits
that all its members mention and nobody else does. Noise traits are set
independently at a low rate. Participants of one archetype are therefore at
distance 0 from each other and far from everybody else.
"""

import logging
from dataclasses import dataclass
from pathlib import Path

import numpy as np
import pandas as pd
from monty.serialization import dumpfn

from ppgen import dlog
from ppgen.features.dataset import Dataset, write_dataset_csv
from ppgen.features.schema import BINARY, LIKERT, VariableDef, VariableSchema

DEFAULT_SIZES = (14, 18, 11, 17, 18, 18, 11, 23)


@dataclass(frozen=True)
class SyntheticDesign:
    """Shape of a planted dataset.

    Parameters
    ----------
    sizes : tuple of int
        generation participants per archetype
    likert_variables : int
        number of 3-level Likert variables; at most ``2 ** likert_variables``
        archetypes
    unique_traits : int
        binary traits owned by every archetype
    noise_traits : int
        binary traits set at random
    noise_rate : float
        probability of a noise trait being set
    validation_size : int
        validation participants per archetype
    """

    sizes: tuple[int, ...] = DEFAULT_SIZES
    likert_variables: int = 3
    unique_traits: int = 4
    noise_traits: int = 20
    noise_rate: float = 0.05
    validation_size: int = 6

    def __post_init__(self):
        if not self.sizes or min(self.sizes) < 1:
            raise ValueError("every archetype needs at least one participant")
        if len(self.sizes) > 2**self.likert_variables:
            raise ValueError(
                f"{len(self.sizes)} archetypes do not fit {self.likert_variables} Likert variables"
            )
        if self.unique_traits < 1:
            raise ValueError("archetypes need at least one unique trait")
        if not 0 <= self.noise_rate < 1:
            raise ValueError(f"noise_rate must lie in [0, 1), got {self.noise_rate}")

    @property
    def archetypes(self) -> int:
        return len(self.sizes)

    @property
    def likert_trait_count(self) -> int:
        return 3 * self.likert_variables

    @property
    def trait_count(self) -> int:
        return self.likert_trait_count + self.archetypes * self.unique_traits + self.noise_traits


def synthetic_schema(design: SyntheticDesign) -> VariableSchema:
    variables = []
    for jj in range(design.likert_variables):
        variables.append(
            VariableDef(
                id=f"l_{jj + 1}",
                kind=LIKERT,
                trait_levels=(3 * jj + 1, 3 * jj + 2, 3 * jj + 3),
                numeric_range=(0.0, 1.0),
                source="closed_question",
                label=f"corner {jj + 1}",
            )
        )
    first_binary = design.likert_trait_count + 1
    for kk, tt in enumerate(range(first_binary, design.trait_count + 1)):
        variables.append(VariableDef(id=f"b_{kk + 1}", kind=BINARY, trait_levels=(tt,)))
    labels = [f"corner {jj // 3 + 1} level {jj % 3}" for jj in range(design.likert_trait_count)]
    for aa in range(design.archetypes):
        labels += [f"archetype {aa} marker {mm}" for mm in range(design.unique_traits)]
    labels += [f"noise {mm}" for mm in range(design.noise_traits)]
    return VariableSchema(tuple(variables), design.trait_count, tuple(labels))


def archetype_traits(design: SyntheticDesign, archetype: int) -> np.ndarray:
    """Deterministic trait bits of an archetype, without noise."""
    bits = np.zeros(design.trait_count, dtype=np.uint8)
    for jj in range(design.likert_variables):
        level = 2 if archetype >> jj & 1 else 0
        bits[3 * jj + level] = 1
    start = design.likert_trait_count + archetype * design.unique_traits
    bits[start : start + design.unique_traits] = 1
    return bits


def generate(
    design: SyntheticDesign,
    seed: int = 0,
    role: str = "generation",
) -> tuple[Dataset, np.ndarray]:
    """Draw a planted dataset.

    Parameters
    ----------
    design : SyntheticDesign
        archetypes and trait blocks
    seed : int
        seed of the noise and the participant order
    role : str
        ``generation`` uses ``design.sizes``; ``validation`` draws
        ``design.validation_size`` participants per archetype

    Returns
    -------
    Dataset
        participants in random order
    np.ndarray
        planted archetype of every participant
    """
    spawn = 0 if role == "generation" else 1
    rng = np.random.default_rng(np.random.SeedSequence(seed, spawn_key=(spawn,)))
    sizes = design.sizes if role == "generation" else (design.validation_size,) * design.archetypes
    labels = np.repeat(np.arange(design.archetypes), sizes)
    rng.shuffle(labels)
    noise_start = design.trait_count - design.noise_traits
    rows = []
    for aa in labels:
        bits = archetype_traits(design, int(aa))
        bits[noise_start:] = rng.random(design.noise_traits) < design.noise_rate
        rows.append(bits)
    prefix = "p" if role == "generation" else "v"
    ids = [f"{prefix}{ii + 1:03d}" for ii in range(len(labels))]
    matrix = np.vstack(rows) if rows else np.zeros((0, design.trait_count), dtype=np.uint8)
    dataset = Dataset.from_trait_matrix(synthetic_schema(design), ids, matrix, role=role)
    return dataset, labels


def write_synthetic(design: SyntheticDesign, output_dir, seed: int = 0) -> dict[str, Path]:
    """Write ``schema.json``, ``generation.csv``, ``validation.csv`` and ``labels.csv``."""
    output_dir = Path(output_dir)
    output_dir.mkdir(parents=True, exist_ok=True)
    gen, gen_labels = generate(design, seed, "generation")
    val, val_labels = generate(design, seed, "validation")
    paths = {
        "schema": output_dir / "schema.json",
        "generation": output_dir / "generation.csv",
        "validation": output_dir / "validation.csv",
        "labels": output_dir / "labels.csv",
    }
    dumpfn(gen.schema.as_dict(), str(paths["schema"]), indent=2)
    write_dataset_csv(gen, paths["generation"])
    write_dataset_csv(val, paths["validation"])
    pd.DataFrame(
        {
            "id": gen.ids + val.ids,
            "role": [gen.role] * len(gen) + [val.role] * len(val),
            "archetype": np.concatenate([gen_labels, val_labels]),
        }
    ).to_csv(paths["labels"], index=False)
    dlog.info(
        "wrote %d generation and %d validation participants of %d archetypes to %s",
        len(gen),
        len(val),
        design.archetypes,
        output_dir,
    )
    return paths


def gen_synthetic(args):
    if args.debug:
        dlog.setLevel(logging.DEBUG)
    design = SyntheticDesign(
        sizes=tuple(args.sizes),
        unique_traits=args.unique_traits,
        noise_traits=args.noise_traits,
        noise_rate=args.noise_rate,
        validation_size=args.validation_size,
    )
    write_synthetic(design, args.OUTPUT, seed=args.seed)
