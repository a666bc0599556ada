"""Persona pipeline and the `ppgen` subcommands built on it.

The full pipeline runs, in order:

    load -> distances -> initial dendrogram -> trait selection -> mask
    -> renormalized distances -> final dendrogram -> pruning step 1
    -> pruning step 2 -> interval check -> exports

Parameters come from built-in defaults, overridden by command line flags,
overridden by the ``--config`` file (json/yaml, see
:func:`ppgen.pipeline.arginfo.run_jdata_arginfo`).
"""

import json
import logging
import math
import os
import sys
from dataclasses import asdict, dataclass, fields
from pathlib import Path
from typing import Optional

import numpy as np

from ppgen import dlog
from ppgen.cluster.diana import (
    LEVEL_SEMANTICS,
    SPLIT_RULES,
    Dendrogram,
    build_dendrogram,
    split_budget,
)
from ppgen.cluster.export import save_dendrogram, write_descriptor_csv
from ppgen.distance.measure import (
    DistanceMatrix,
    distance_matrix,
    save_distance_cache,
    write_matrix_csv,
)
from ppgen.errors import ConfigError, DegenerateInputError, VerificationError
from ppgen.features.dataset import (
    Dataset,
    load_dataset,
    mask_traits,
    read_trait_rows,
    validate_record,
)
from ppgen.features.schema import (
    REFERENCE_SCHEMA_PATH,
    VariableSchema,
    load_schema,
    reference_schema,
)
from ppgen.persona.prune import (
    PersonaSet,
    ci_overlap_check,
    prune_step1,
    prune_step2,
    verify_personas,
)
from ppgen.persona.report import (
    load_persona_set,
    persona_variable_summary,
    save_persona_set,
    write_persona_report,
)
from ppgen.persona.selection import (
    SelectionReport,
    load_selection,
    save_selection,
    select_discriminative,
)
from ppgen.pipeline.arginfo import RUN_FORMAT_VERSION, run_jdata_arginfo
from ppgen.pipeline.manifest import MANIFEST_NAME, RunManifest, check_manifest
from ppgen.projection.project import (
    builtin_specs,
    find_spec,
    load_projection_specs,
    points_frame,
    project,
)
from ppgen.stats.correction import CORRECTIONS
from ppgen.stats.exact import ALTERNATIVES, boschloo
from ppgen.util import check_format_version, create_path, load_file, normalize, sepline
from ppgen.validation.saturation import DECISION_RULES, saturation_check
from ppgen.validation.sensitivity import FM_LOW, sensitivity_analysis

OUTPUT_DIR_ENV = "PPGEN_OUTPUT_DIR"
DEFAULT_OUTPUT_DIR = "ppgen_out"

SELECTION_FILE = "selection.json"
PERSONA_FILE = "personas.json"


@dataclass(frozen=True)
class RunConfig:
    """Parameters of one run; see :func:`~ppgen.pipeline.arginfo.run_jdata_arginfo`."""

    schema_path: Optional[str] = None
    data_path: Optional[str] = None
    validation_data_path: Optional[str] = None
    drop_invalid: bool = False
    derive_composites: bool = False
    alpha: float = 0.05
    selection_threshold: float = 0.001
    selection_levels: int = 15
    boschloo_grid: int = 1000
    boschloo_refine: bool = True
    family_size: Optional[int] = None
    confidence: float = 0.95
    split_rule: str = SPLIT_RULES[0]
    level_semantics: str = LEVEL_SEMANTICS[0]
    correction: str = "holm"
    fm_samples: int = 500
    r_max: int = 6
    fm_levels: tuple[int, ...] = tuple(range(2, 16))
    fm_distributions: bool = False
    seed: int = 0
    saturation_rule: str = DECISION_RULES[0]
    z_max: float = 3.0
    output_dir: str = DEFAULT_OUTPUT_DIR
    threads: int = 1
    distance_cache: bool = False

    def __post_init__(self):
        checks = [
            (0 < self.alpha < 1, "alpha must lie in (0, 1)"),
            (0 < self.selection_threshold <= 1, "selection_threshold must lie in (0, 1]"),
            (0 < self.confidence < 1, "confidence must lie in (0, 1)"),
            (self.selection_levels >= 1, "selection_levels must be positive"),
            (self.boschloo_grid >= 2, "boschloo_grid must be at least 2"),
            (self.fm_samples >= 1, "fm_samples must be positive"),
            (self.r_max >= 1, "r_max must be positive"),
            (len(self.fm_levels) > 0, "fm_levels must not be empty"),
            (all(vv >= 1 for vv in self.fm_levels), "fm_levels must be positive"),
            (self.split_rule in SPLIT_RULES, f"split_rule must be one of {SPLIT_RULES}"),
            (
                self.level_semantics in LEVEL_SEMANTICS,
                f"level_semantics must be one of {LEVEL_SEMANTICS}",
            ),
            (self.correction in CORRECTIONS, f"correction must be one of {tuple(CORRECTIONS)}"),
            (
                self.saturation_rule in DECISION_RULES,
                f"saturation_rule must be one of {DECISION_RULES}",
            ),
            (self.z_max > 0, "z_max must be positive"),
            (self.threads >= 1, "threads must be positive"),
            (
                self.family_size is None or self.family_size >= 1,
                "family_size must be positive",
            ),
        ]
        errors = [msg for ok, msg in checks if not ok]
        if errors:
            raise ConfigError("; ".join(errors), details={"errors": errors})

    def as_dict(self) -> dict:
        ret = {"format_version": RUN_FORMAT_VERSION, **asdict(self)}
        ret["fm_levels"] = list(self.fm_levels)
        return ret

    @classmethod
    def from_dict(cls, data: dict) -> "RunConfig":
        """Normalize run parameters with dargs and build the config.

        Raises
        ------
        ConfigError
            unknown keys, wrong types or values out of range
        """
        try:
            data = normalize(run_jdata_arginfo(), dict(data))
        except Exception as e:
            raise ConfigError(f"invalid run parameters: {e}") from e
        check_format_version(data.pop("format_version"), RUN_FORMAT_VERSION, "run parameters")
        if data["output_dir"] is None:
            data["output_dir"] = os.environ.get(OUTPUT_DIR_ENV, DEFAULT_OUTPUT_DIR)
        try:
            data["fm_levels"] = tuple(int(vv) for vv in data["fm_levels"])
        except (TypeError, ValueError) as e:
            raise ConfigError(f"fm_levels must be a list of integers: {e}") from e
        return cls(**data)


def build_config(args) -> RunConfig:
    """Merge defaults, command line flags and the ``--config`` file, in rising priority."""
    data = {}
    for ff in fields(RunConfig):
        value = getattr(args, ff.name, None)
        if value is not None:
            data[ff.name] = value
    config_file = getattr(args, "config", None)
    if config_file:
        try:
            jdata = load_file(config_file)
        except (OSError, ValueError) as e:
            raise ConfigError(f"cannot read config file {config_file}: {e}") from e
        if not isinstance(jdata, dict):
            raise ConfigError(f"config file {config_file} must hold a mapping")
        data.update(jdata)
    return RunConfig.from_dict(data)


def load_run_schema(config: RunConfig) -> VariableSchema:
    if config.schema_path is None:
        return reference_schema()
    return load_schema(config.schema_path)


def load_inputs(config: RunConfig) -> Dataset:
    if config.data_path is None:
        raise ConfigError("no generation set given, use --data or data_path")
    return load_dataset(
        load_run_schema(config),
        config.data_path,
        "generation",
        config.drop_invalid,
        config.derive_composites,
    )


def masked_distances(masked: Dataset, threads: int = 1) -> DistanceMatrix:
    """Distances on the retained traits; a single participant needs no normalizer."""
    if len(masked) == 1:
        values = np.zeros((1, 1))
        values.setflags(write=False)
        return DistanceMatrix(values, "zero", tuple(masked.ids))
    return distance_matrix(masked, threads=threads)


class PipelineResult:
    """Every intermediate result of one run, for export."""

    def __init__(
        self,
        dataset: Dataset,
        selection: SelectionReport,
        masked: Dataset,
        final_dm: DistanceMatrix,
        final: Dendrogram,
        step1: Dendrogram,
        personas: PersonaSet,
        initial_dm: Optional[DistanceMatrix] = None,
        initial: Optional[Dendrogram] = None,
    ):
        self.dataset = dataset
        self.selection = selection
        self.masked = masked
        self.final_dm = final_dm
        self.final = final
        self.step1 = step1
        self.personas = personas
        self.initial_dm = initial_dm
        self.initial = initial


def run_pipeline(
    config: RunConfig,
    dataset: Dataset,
    manifest: Optional[RunManifest] = None,
    selection: Optional[SelectionReport] = None,
) -> PipelineResult:
    """Run every stage from the distance matrix to the interval check.

    Parameters
    ----------
    config : RunConfig
        run parameters
    dataset : Dataset
        the generation set
    manifest : RunManifest, optional
        receives the stage timings
    selection : SelectionReport, optional
        reuse a trait selection instead of selecting again

    Returns
    -------
    PipelineResult
        every intermediate product
    """
    manifest = RunManifest(config.as_dict()) if manifest is None else manifest
    grid, refine = config.boschloo_grid, config.boschloo_refine
    initial_dm = initial = None
    if selection is None:
        with manifest.stage("distances"):
            initial_dm = distance_matrix(dataset, threads=config.threads)
        with manifest.stage("initial dendrogram"):
            initial = build_dendrogram(
                dataset,
                initial_dm,
                max_depth=split_budget(config.selection_levels, config.level_semantics),
                split_rule=config.split_rule,
                rng_seed=config.seed,
            )
        with manifest.stage("selection"):
            selection = select_discriminative(
                initial,
                dataset,
                config.selection_levels,
                config.selection_threshold,
                grid,
                refine,
                config.threads,
                config.level_semantics,
            )
    traits = tuple(sorted(selection.retained))
    if len(dataset) > 1 and not any(
        var.trait_levels[0] in selection.retained for var in dataset.schema.binary
    ):
        raise DegenerateInputError(
            "no binary trait is discriminative, the renormalized distance is undefined",
            details={"retained": list(traits)},
        )
    with manifest.stage("masked distances"):
        masked = mask_traits(dataset, selection.retained)
        final_dm = masked_distances(masked, config.threads)
    with manifest.stage("final dendrogram"):
        # descriptors cover every trait, distances only the retained ones
        final = build_dendrogram(
            dataset, final_dm, split_rule=config.split_rule, rng_seed=config.seed
        )
    with manifest.stage("pruning step 1"):
        step1 = prune_step1(
            final, traits, config.alpha, config.family_size, grid, refine, config.correction
        )
    with manifest.stage("pruning step 2"):
        personas = prune_step2(
            step1,
            traits,
            config.alpha,
            config.family_size,
            grid,
            refine,
            config.threads,
            config.correction,
        )
    with manifest.stage("interval check"):
        ci_overlap_check(personas, config.confidence)
    return PipelineResult(
        dataset=dataset,
        selection=selection,
        masked=masked,
        final_dm=final_dm,
        final=final,
        step1=step1,
        personas=personas,
        initial_dm=initial_dm,
        initial=initial,
    )


def export_pipeline(
    result: PipelineResult,
    config: RunConfig,
    out: Path,
    manifest: RunManifest,
) -> list[Path]:
    """Write every artifact of a run and, last, the manifest."""
    dataset = result.dataset
    ids = dataset.ids
    trait_count = dataset.schema.trait_count
    written = []
    if result.initial is not None:
        save_dendrogram(result.initial, out / "dendrogram_initial.json", ids)
        written.append(out / "dendrogram_initial.json")
    save_selection(result.selection, out / SELECTION_FILE)
    save_dendrogram(result.final, out / "dendrogram.json", ids)
    save_dendrogram(result.step1, out / "dendrogram_step1.json", ids)
    save_dendrogram(result.personas.dendrogram, out / "dendrogram_pruned.json", ids)
    save_persona_set(result.personas, dataset, out / PERSONA_FILE)
    write_descriptor_csv(result.personas.leaves, trait_count, out / "descriptors.csv")
    persona_variable_summary(result.personas, dataset).to_csv(
        out / "persona_summary.csv", index=False, float_format="%.6g"
    )
    write_persona_report(result.personas, dataset, out / "report.md")
    written += [
        out / name
        for name in (
            SELECTION_FILE,
            "dendrogram.json",
            "dendrogram_step1.json",
            "dendrogram_pruned.json",
            PERSONA_FILE,
            "descriptors.csv",
            "persona_summary.csv",
            "report.md",
        )
    ]
    if config.distance_cache:
        if result.initial_dm is not None:
            save_distance_cache(result.initial_dm, out / "distances.h5")
            written.append(out / "distances.h5")
        save_distance_cache(result.final_dm, out / "distances_masked.h5")
        written.append(out / "distances_masked.h5")
    for path in written:
        manifest.add_output(path)
    manifest.dump(out / MANIFEST_NAME)
    return written


def _setup(args) -> RunConfig:
    if getattr(args, "debug", False):
        dlog.setLevel(logging.DEBUG)
    return build_config(args)


def _output_dir(config: RunConfig) -> Path:
    out = Path(config.output_dir)
    out.mkdir(parents=True, exist_ok=True)
    return out


def _new_manifest(config: RunConfig) -> RunManifest:
    manifest = RunManifest(config.as_dict())
    schema_path = REFERENCE_SCHEMA_PATH if config.schema_path is None else config.schema_path
    for path in (schema_path, config.data_path, config.validation_data_path):
        if path is not None and os.path.isfile(path):
            manifest.add_input(path)
    return manifest


def _update_manifest(out: Path, inputs=(), outputs=()):
    """Record the files of a diagnostic in the manifest of an earlier run, if any."""
    path = out / MANIFEST_NAME
    if not path.is_file():
        return
    manifest = RunManifest.load(path)
    for pp in inputs:
        manifest.add_input(pp)
    for pp in outputs:
        manifest.add_output(pp)
    manifest.dump(path)


def _stored_selection(out: Path) -> Optional[SelectionReport]:
    path = out / SELECTION_FILE
    if not path.is_file():
        return None
    dlog.info("using the trait selection in %s", path)
    return load_selection(path)


def cmd_pipeline(args) -> int:
    config = _setup(args)
    dataset = load_inputs(config)
    out = create_path(config.output_dir)
    manifest = _new_manifest(config)
    sepline("persona pipeline")
    result = run_pipeline(config, dataset, manifest)
    export_pipeline(result, config, out, manifest)
    sepline()
    dlog.info(
        "%d personas from %d participants, %d discriminative traits, written to %s",
        len(result.personas),
        len(dataset),
        result.selection.S,
        out,
    )
    return 0


def cmd_distances(args) -> int:
    config = _setup(args)
    dataset = load_inputs(config)
    out = _output_dir(config)
    dm = distance_matrix(dataset, threads=config.threads)
    write_matrix_csv(dm.values, out / "distances.csv", dataset.ids)
    if config.distance_cache:
        save_distance_cache(dm, out / "distances.h5")
    dlog.info("distances of %d participants written to %s", len(dataset), out)
    return 0


def cmd_cluster(args) -> int:
    config = _setup(args)
    dataset = load_inputs(config)
    out = _output_dir(config)
    dm = distance_matrix(dataset, threads=config.threads)
    tree = build_dendrogram(
        dataset,
        dm,
        max_depth=getattr(args, "max_depth", None),
        split_rule=config.split_rule,
        rng_seed=config.seed,
    )
    save_dendrogram(tree, out / "dendrogram_initial.json", dataset.ids)
    write_descriptor_csv(list(tree.nodes()), dataset.schema.trait_count, out / "descriptors_initial.csv")
    dlog.info("dendrogram with %d leaves written to %s", tree.leaf_count, out)
    return 0


def cmd_select(args) -> int:
    config = _setup(args)
    dataset = load_inputs(config)
    out = _output_dir(config)
    dm = distance_matrix(dataset, threads=config.threads)
    tree = build_dendrogram(
        dataset,
        dm,
        max_depth=split_budget(config.selection_levels, config.level_semantics),
        split_rule=config.split_rule,
        rng_seed=config.seed,
    )
    save_dendrogram(tree, out / "dendrogram_initial.json", dataset.ids)
    selection = select_discriminative(
        tree,
        dataset,
        config.selection_levels,
        config.selection_threshold,
        config.boschloo_grid,
        config.boschloo_refine,
        config.threads,
        config.level_semantics,
    )
    save_selection(selection, out / SELECTION_FILE)
    return 0


def cmd_prune(args) -> int:
    config = _setup(args)
    dataset = load_inputs(config)
    out = _output_dir(config)
    manifest = _new_manifest(config)
    result = run_pipeline(config, dataset, manifest, selection=_stored_selection(out))
    export_pipeline(result, config, out, manifest)
    dlog.info("%d personas written to %s", len(result.personas), out)
    return 0


def r_max_limit(personas: PersonaSet) -> int:
    """Half of the smallest persona, rounded up."""
    return math.ceil(min(ll.size for ll in personas.leaves) / 2)


def cmd_sensitivity(args) -> int:
    config = _setup(args)
    dataset = load_inputs(config)
    out = _output_dir(config)
    selection = _stored_selection(out)
    if selection is not None and (out / PERSONA_FILE).is_file():
        personas = load_persona_set(out / PERSONA_FILE, dataset)
    else:
        dlog.info("no pipeline artifacts in %s, running the pipeline first", out)
        manifest = _new_manifest(config)
        result = run_pipeline(config, dataset, manifest)
        export_pipeline(result, config, out, manifest)
        selection, personas = result.selection, result.personas
    limit = r_max_limit(personas)
    if config.r_max > limit:
        raise ConfigError(
            f"r_max={config.r_max} removes more than half of the smallest persona; "
            f"use r_max <= {limit}",
            details={"r_max": config.r_max, "limit": limit},
        )
    masked = mask_traits(dataset, selection.retained)
    sepline("sensitivity")
    report = sensitivity_analysis(
        dataset,
        masked_distances(masked, config.threads),
        range(1, config.r_max + 1),
        config.fm_levels,
        samples=config.fm_samples,
        seed=config.seed,
        split_rule=config.split_rule,
        keep_samples=config.fm_distributions,
        threads=config.threads,
        level_semantics=config.level_semantics,
    )
    written = [out / "sensitivity.csv"]
    report.write_csv(written[0])
    if config.fm_distributions:
        written.append(out / "sensitivity_samples.csv")
        report.write_samples_csv(written[1])
    _update_manifest(out, outputs=written)
    report.warn_low_levels(FM_LOW)
    return 0


def cmd_saturation(args) -> int:
    config = _setup(args)
    if config.validation_data_path is None:
        raise ConfigError("saturation needs a validation set, use --validation-data")
    gen = load_inputs(config)
    val = load_dataset(
        gen.schema,
        config.validation_data_path,
        "validation",
        config.drop_invalid,
        config.derive_composites,
    )
    out = _output_dir(config)
    selection = _stored_selection(out)
    if selection is not None:
        gen = mask_traits(gen, selection.retained)
        val = mask_traits(val, selection.retained)
    report = saturation_check(gen, val, config.saturation_rule, config.z_max, config.threads)
    report.write_json(out / "saturation.json")
    _update_manifest(out, inputs=[config.validation_data_path], outputs=[out / "saturation.json"])
    return 0


def cmd_project(args) -> int:
    config = _setup(args)
    dataset = load_inputs(config)
    specs = load_projection_specs(args.spec_file) if args.spec_file else builtin_specs()
    spec = find_spec(args.spec, specs)
    if args.participants:
        points = project(dataset, spec)
    else:
        path = Path(args.personas) if args.personas else Path(config.output_dir) / PERSONA_FILE
        if not path.is_file():
            raise ConfigError(f"no persona file {path}, run `ppgen pipeline` first or pass --personas")
        points = project(load_persona_set(path, dataset), spec, dataset)
    frame = points_frame(points)
    if args.csv:
        frame.to_csv(args.csv, index=False, float_format="%.17g")
    else:
        frame.to_csv(sys.stdout, index=False, float_format="%.17g")
    return 0


def cmd_validate_data(args) -> int:
    config = _setup(args)
    if config.data_path is None:
        raise ConfigError("no data file given, use --data or data_path")
    schema = load_run_schema(config)
    rows = read_trait_rows(schema, config.data_path)
    invalid = []
    for pid, bits in rows:
        violations = validate_record(schema, bits)
        if violations:
            invalid.append({"id": pid, "violations": [vv.as_dict() for vv in violations]})
    ids = [pid for pid, _ in rows]
    duplicates = sorted({pid for pid in ids if ids.count(pid) > 1})
    report = {
        "participants": len(rows),
        "invalid": invalid,
        "duplicate_ids": duplicates,
        "valid": not invalid and not duplicates,
    }
    print(json.dumps(report, indent=2))
    return 0 if report["valid"] else 1


def cmd_test2x2(args) -> int:
    if getattr(args, "debug", False):
        dlog.setLevel(logging.DEBUG)
    if args.alternative not in ALTERNATIVES:
        raise ConfigError(f"alternative must be one of {ALTERNATIVES}")
    try:
        result = boschloo(
            (args.x1, args.n1, args.x2, args.n2),
            grid=args.grid,
            alternative=args.alternative,
            refine=not args.no_refine,
        )
    except ValueError as e:
        raise ConfigError(f"invalid 2x2 table: {e}") from e
    print(json.dumps(result.as_dict(), indent=2))
    return 0


def cmd_verify(args) -> int:
    """Re-check exported personas from the raw data and the manifest hashes."""
    config = _setup(args)
    dataset = load_inputs(config)
    out = Path(config.output_dir)
    persona_path = out / PERSONA_FILE
    if not persona_path.is_file():
        raise ConfigError(f"no persona file {persona_path}, run `ppgen pipeline` first")
    grid, refine, confidence = config.boschloo_grid, config.boschloo_refine, config.confidence
    problems = []
    if (out / MANIFEST_NAME).is_file():
        manifest = RunManifest.load(out / MANIFEST_NAME)
        problems = check_manifest(manifest, out)
        # re-test with the parameters of the run
        grid = int(manifest.config.get("boschloo_grid", grid))
        refine = bool(manifest.config.get("boschloo_refine", refine))
        confidence = float(manifest.config.get("confidence", confidence))
    else:
        dlog.warning("no manifest in %s, input hashes are not checked", out)
    personas = load_persona_set(persona_path, dataset)
    violations = verify_personas(
        [ll.members for ll in personas.leaves],
        dataset,
        personas.traits,
        personas.alpha,
        personas.family_size,
        confidence,
        grid,
        refine,
        personas.correction,
    )
    report = {
        "personas": len(personas),
        "violations": violations,
        "manifest": problems,
    }
    print(json.dumps(report, indent=2))
    if violations or problems:
        raise VerificationError(
            f"{len(violations)} persona violation(s), {len(problems)} manifest mismatch(es)",
            details=report,
        )
    dlog.info("%d personas verified", len(personas))
    return 0
