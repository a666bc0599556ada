from dargs import Argument

from ppgen.arginfo import format_version_arginfo
from ppgen.cluster.diana import LEVEL_SEMANTICS, SPLIT_RULES

RUN_FORMAT_VERSION = "1.0"


def data_args() -> list[Argument]:
    """Generate arginfo for the input files.

    Returns
    -------
    list[Argument]
        arginfo
    """
    doc_schema_path = (
        "Path to the variable schema, json/yaml format. The shipped 133-trait "
        "reference schema is used if not set."
    )
    doc_data_path = "Path to the generation set, CSV or JSON."
    doc_validation_data_path = (
        "Path to the validation set, CSV or JSON. Required by `ppgen saturation`."
    )
    doc_drop_invalid = (
        "Drop participant records with Likert violations, with a warning, "
        "instead of failing."
    )
    doc_derive_composites = (
        "Recompute the composite Likert variables (importance change and control "
        "mismatch) from the raw answers instead of reading their columns."
    )
    return [
        Argument("schema_path", [str, type(None)], optional=True, default=None, doc=doc_schema_path),
        Argument("data_path", [str, type(None)], optional=True, default=None, doc=doc_data_path),
        Argument(
            "validation_data_path",
            [str, type(None)],
            optional=True,
            default=None,
            doc=doc_validation_data_path,
        ),
        Argument("drop_invalid", bool, optional=True, default=False, doc=doc_drop_invalid),
        Argument(
            "derive_composites", bool, optional=True, default=False, doc=doc_derive_composites
        ),
    ]


def persona_args() -> list[Argument]:
    """Generate arginfo for selection and pruning.

    Returns
    -------
    list[Argument]
        arginfo
    """
    doc_alpha = "Family-wise error rate of the correction used for pruning."
    doc_selection_threshold = (
        "Raw p-value below which a trait is discriminative during selection."
    )
    doc_selection_levels = "Number of dendrogram cuts examined during selection."
    doc_boschloo_grid = "Number of nuisance parameter grid points of Boschloo's test."
    doc_boschloo_refine = (
        "Refine the best grid point of Boschloo's test by a local ternary search."
    )
    doc_family_size = (
        "Correction family size. Defaults to the number of discriminative traits."
    )
    doc_confidence = "Confidence level of the Agresti intervals."
    doc_split_rule = (
        "Leaf split next while growing the dendrogram: `diameter` (largest "
        "maximum distance), `avg-dissimilarity` (largest mean distance) or "
        "`largest` (most members)."
    )
    doc_level_semantics = (
        "Meaning of a dendrogram level `v` in selection and sensitivity: "
        "`split-order` (the clusters after the first `v - 1` splits) or `depth` "
        "(the nodes at tree depth `v - 1`)."
    )
    doc_correction = (
        "Family-wise correction of the per-trait tests: `holm` (step-down) or "
        "`bonferroni`."
    )
    return [
        Argument("alpha", float, optional=True, default=0.05, doc=doc_alpha),
        Argument(
            "selection_threshold",
            float,
            optional=True,
            default=0.001,
            doc=doc_selection_threshold,
        ),
        Argument("selection_levels", int, optional=True, default=15, doc=doc_selection_levels),
        Argument("boschloo_grid", int, optional=True, default=1000, doc=doc_boschloo_grid),
        Argument("boschloo_refine", bool, optional=True, default=True, doc=doc_boschloo_refine),
        Argument("family_size", [int, type(None)], optional=True, default=None, doc=doc_family_size),
        Argument("confidence", float, optional=True, default=0.95, doc=doc_confidence),
        Argument(
            "split_rule",
            str,
            optional=True,
            default=SPLIT_RULES[0],
            doc=doc_split_rule,
        ),
        Argument(
            "level_semantics",
            str,
            optional=True,
            default=LEVEL_SEMANTICS[0],
            doc=doc_level_semantics,
        ),
        Argument("correction", str, optional=True, default="holm", doc=doc_correction),
    ]


def validation_args() -> list[Argument]:
    """Generate arginfo for the sensitivity and saturation diagnostics.

    Returns
    -------
    list[Argument]
        arginfo
    """
    doc_fm_samples = "Random subsets drawn per removal count."
    doc_r_max = (
        "Largest number of removed participants. At most half of the smallest "
        "persona, rounded up."
    )
    doc_fm_levels = "Cut sizes compared by the Fowlkes-Mallows index."
    doc_fm_distributions = "Also write every sample, for violin plots."
    doc_seed = "Root seed of every random choice."
    doc_saturation_rule = (
        "Outlier rule of the saturation check: `tukey` (upper Tukey fence) or "
        "`zscore`."
    )
    doc_z_max = "z-score bound of the `zscore` rule."
    return [
        Argument("fm_samples", int, optional=True, default=500, doc=doc_fm_samples),
        Argument("r_max", int, optional=True, default=6, doc=doc_r_max),
        Argument(
            "fm_levels",
            list,
            optional=True,
            default=list(range(2, 16)),
            doc=doc_fm_levels,
        ),
        Argument("fm_distributions", bool, optional=True, default=False, doc=doc_fm_distributions),
        Argument("seed", int, optional=True, default=0, doc=doc_seed),
        Argument("saturation_rule", str, optional=True, default="tukey", doc=doc_saturation_rule),
        Argument("z_max", float, optional=True, default=3.0, doc=doc_z_max),
    ]


def output_args() -> list[Argument]:
    """Generate arginfo for outputs and execution.

    Returns
    -------
    list[Argument]
        arginfo
    """
    doc_output_dir = (
        "Output directory. Defaults to $PPGEN_OUTPUT_DIR, or `ppgen_out`."
    )
    doc_threads = "Worker processes. Results never depend on it."
    doc_distance_cache = "Also store the distance matrices as HDF5."
    return [
        Argument("output_dir", [str, type(None)], optional=True, default=None, doc=doc_output_dir),
        Argument("threads", int, optional=True, default=1, doc=doc_threads),
        Argument("distance_cache", bool, optional=True, default=False, doc=doc_distance_cache),
    ]


def run_jdata_arginfo() -> Argument:
    """Generate arginfo for the run parameters, the `--config` file of every subcommand.

    Returns
    -------
    Argument
        arginfo
    """
    doc_run_jdata = "Parameters of a ppgen run, json/yaml format."
    return Argument(
        "run_jdata",
        dict,
        sub_fields=[
            format_version_arginfo(RUN_FORMAT_VERSION),
            *data_args(),
            *persona_args(),
            *validation_args(),
            *output_args(),
        ],
        doc=doc_run_jdata,
    )
