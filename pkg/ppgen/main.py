#!/usr/bin/env python

import argparse
import json
import sys
from typing import Optional

from ppgen import dlog, info
from ppgen.cluster.diana import LEVEL_SEMANTICS, SPLIT_RULES
from ppgen.errors import PpgenError
from ppgen.pipeline.run import (
    cmd_cluster,
    cmd_distances,
    cmd_pipeline,
    cmd_project,
    cmd_prune,
    cmd_saturation,
    cmd_select,
    cmd_sensitivity,
    cmd_test2x2,
    cmd_validate_data,
    cmd_verify,
)
from ppgen.stats.correction import CORRECTIONS
from ppgen.stats.exact import ALTERNATIVES, DEFAULT_GRID
from ppgen.tools.synthetic import DEFAULT_SIZES, gen_synthetic
from ppgen.validation.saturation import DECISION_RULES

"""
Command line front end of the persona generator.
"""


def _common_parser() -> argparse.ArgumentParser:
    """Options shared by the subcommands that read a dataset.

    Flags left out fall back to the ``--config`` file or the built-in
    defaults; the config file wins over flags.
    """
    parser = argparse.ArgumentParser(add_help=False)
    parser.add_argument(
        "-s",
        "--schema",
        dest="schema_path",
        type=str,
        default=None,
        help="variable schema, json/yaml format; the reference schema if not set",
    )
    parser.add_argument(
        "--data", dest="data_path", type=str, default=None, help="generation set, CSV or JSON"
    )
    parser.add_argument(
        "-o",
        "--output",
        dest="output_dir",
        type=str,
        default=None,
        help="output directory, defaults to $PPGEN_OUTPUT_DIR or ppgen_out",
    )
    parser.add_argument(
        "-c", "--config", type=str, default=None, help="run parameters, json/yaml format"
    )
    parser.add_argument(
        "-t", "--threads", type=int, default=None, help="worker processes, never changes results"
    )
    parser.add_argument(
        "--drop-invalid",
        dest="drop_invalid",
        action="store_true",
        default=None,
        help="drop invalid participant records with a warning",
    )
    parser.add_argument(
        "--derive-composites",
        dest="derive_composites",
        action="store_true",
        default=None,
        help="recompute the composite Likert variables from the raw answers",
    )
    parser.add_argument(
        "--distance-cache",
        dest="distance_cache",
        action="store_true",
        default=None,
        help="also store distance matrices as HDF5",
    )
    parser.add_argument("-d", "--debug", action="store_true", help="log debug info")
    return parser


def _persona_parser() -> argparse.ArgumentParser:
    """Options of selection and pruning."""
    parser = argparse.ArgumentParser(add_help=False)
    parser.add_argument("--alpha", type=float, default=None, help="family-wise error rate")
    parser.add_argument(
        "--threshold",
        dest="selection_threshold",
        type=float,
        default=None,
        help="raw p-value threshold of trait selection",
    )
    parser.add_argument(
        "--levels",
        dest="selection_levels",
        type=int,
        default=None,
        help="dendrogram cuts examined by trait selection",
    )
    parser.add_argument(
        "--grid", dest="boschloo_grid", type=int, default=None, help="Boschloo nuisance grid size"
    )
    parser.add_argument(
        "--no-refine",
        dest="boschloo_refine",
        action="store_false",
        default=None,
        help="use the plain grid maximum of Boschloo's test",
    )
    parser.add_argument(
        "--family-size", type=int, default=None, help="correction family size, the trait count if not set"
    )
    parser.add_argument(
        "--split-rule", choices=SPLIT_RULES, default=None, help="leaf split next"
    )
    parser.add_argument(
        "--level-semantics",
        choices=LEVEL_SEMANTICS,
        default=None,
        help="dendrogram levels by split order or by tree depth",
    )
    parser.add_argument(
        "--correction",
        choices=tuple(CORRECTIONS),
        default=None,
        help="family-wise correction of the per-trait tests",
    )
    parser.add_argument("--seed", type=int, default=None, help="root seed")
    return parser


def main_parser() -> argparse.ArgumentParser:
    """Returns parser for `ppgen` command.

    Returns
    -------
    argparse.ArgumentParser
        parser for `ppgen` command
    """
    parser = argparse.ArgumentParser(
        description="""
    ppgen elicits statistically distinct personas from annotated questionnaire
    data: it clusters participants divisively, selects discriminative traits
    and prunes the dendrogram with exact tests. This script works based on
    several sub-commands with their own options. To see the options for the
    sub-commands, type "ppgen sub-command -h"."""
    )

    subparsers = parser.add_subparsers()
    common = _common_parser()
    persona = _persona_parser()

    # validate-data
    parser_validate = subparsers.add_parser(
        "validate-data",
        parents=[common],
        help="Check every participant record against the schema.",
    )
    parser_validate.set_defaults(func=cmd_validate_data)

    # distances
    parser_distances = subparsers.add_parser(
        "distances", parents=[common], help="Write the pairwise distance matrix."
    )
    parser_distances.set_defaults(func=cmd_distances)

    # cluster
    parser_cluster = subparsers.add_parser(
        "cluster", parents=[common, persona], help="Build the divisive dendrogram over all traits."
    )
    parser_cluster.add_argument(
        "--max-depth", type=int, default=None, help="maximum number of splits"
    )
    parser_cluster.set_defaults(func=cmd_cluster)

    # select
    parser_select = subparsers.add_parser(
        "select", parents=[common, persona], help="Select the discriminative traits."
    )
    parser_select.set_defaults(func=cmd_select)

    # prune
    parser_prune = subparsers.add_parser(
        "prune",
        parents=[common, persona],
        help="Prune the final dendrogram into personas, reusing selection.json if present.",
    )
    parser_prune.set_defaults(func=cmd_prune)

    # pipeline
    parser_pipeline = subparsers.add_parser(
        "pipeline", parents=[common, persona], help="Run the whole persona pipeline."
    )
    parser_pipeline.set_defaults(func=cmd_pipeline)

    # sensitivity
    parser_sensitivity = subparsers.add_parser(
        "sensitivity",
        parents=[common, persona],
        help="Fowlkes-Mallows sensitivity of the dendrogram to removed participants.",
    )
    parser_sensitivity.add_argument(
        "--r-max", type=int, default=None, help="largest number of removed participants"
    )
    parser_sensitivity.add_argument(
        "--samples", dest="fm_samples", type=int, default=None, help="random subsets per removal count"
    )
    parser_sensitivity.add_argument(
        "--fm-levels", type=int, nargs="+", default=None, help="cut sizes compared"
    )
    parser_sensitivity.add_argument(
        "--distributions",
        dest="fm_distributions",
        action="store_true",
        default=None,
        help="also write every sample",
    )
    parser_sensitivity.set_defaults(func=cmd_sensitivity)

    # saturation
    parser_saturation = subparsers.add_parser(
        "saturation",
        parents=[common],
        help="Nearest-neighbour outliers of the validation set.",
    )
    parser_saturation.add_argument(
        "--validation-data",
        dest="validation_data_path",
        type=str,
        default=None,
        help="validation set, CSV or JSON",
    )
    parser_saturation.add_argument(
        "--rule", dest="saturation_rule", choices=DECISION_RULES, default=None, help="outlier rule"
    )
    parser_saturation.add_argument(
        "--z-max", type=float, default=None, help="z-score bound of the zscore rule"
    )
    parser_saturation.set_defaults(func=cmd_saturation)

    # project
    parser_project = subparsers.add_parser(
        "project", parents=[common], help="Project personas or participants onto attribute axes."
    )
    parser_project.add_argument("--spec", type=str, default="knowledge", help="projection name")
    parser_project.add_argument(
        "--spec-file", type=str, default=None, help="projection specs, json/yaml format"
    )
    parser_project.add_argument(
        "--personas", type=str, default=None, help="persona file, OUTPUT/personas.json if not set"
    )
    parser_project.add_argument(
        "--participants", action="store_true", help="project participants instead of personas"
    )
    parser_project.add_argument(
        "--csv", type=str, default=None, help="output CSV file, stdout if not set"
    )
    parser_project.set_defaults(func=cmd_project)

    # test2x2
    parser_test = subparsers.add_parser(
        "test2x2", help="Fisher and Boschloo p-values of one 2x2 table."
    )
    parser_test.add_argument("--x1", type=int, required=True, help="successes in group 1")
    parser_test.add_argument("--n1", type=int, required=True, help="size of group 1")
    parser_test.add_argument("--x2", type=int, required=True, help="successes in group 2")
    parser_test.add_argument("--n2", type=int, required=True, help="size of group 2")
    parser_test.add_argument("--grid", type=int, default=DEFAULT_GRID, help="nuisance grid size")
    parser_test.add_argument(
        "--alternative", choices=ALTERNATIVES, default="two-sided", help="alternative hypothesis"
    )
    parser_test.add_argument(
        "--no-refine", action="store_true", help="use the plain grid maximum"
    )
    parser_test.add_argument("-d", "--debug", action="store_true", help="log debug info")
    parser_test.set_defaults(func=cmd_test2x2)

    # verify
    parser_verify = subparsers.add_parser(
        "verify",
        parents=[common],
        help="Re-check exported personas and the manifest hashes.",
    )
    parser_verify.set_defaults(func=cmd_verify)

    # synth
    parser_synth = subparsers.add_parser(
        "synth", help="Write a planted-archetype dataset."
    )
    parser_synth.add_argument("OUTPUT", type=str, help="output directory")
    parser_synth.add_argument(
        "--sizes",
        type=int,
        nargs="+",
        default=list(DEFAULT_SIZES),
        help="generation participants per archetype",
    )
    parser_synth.add_argument("--unique-traits", type=int, default=4, help="marker traits per archetype")
    parser_synth.add_argument("--noise-traits", type=int, default=20, help="random traits")
    parser_synth.add_argument("--noise-rate", type=float, default=0.05, help="rate of a noise trait")
    parser_synth.add_argument(
        "--validation-size", type=int, default=6, help="validation participants per archetype"
    )
    parser_synth.add_argument("--seed", type=int, default=0, help="random seed")
    parser_synth.add_argument("-d", "--debug", action="store_true", help="log debug info")
    parser_synth.set_defaults(func=gen_synthetic)
    return parser


def main(argv: Optional[list[str]] = None) -> int:
    parser = main_parser()
    try:
        import argcomplete

        argcomplete.autocomplete(parser)
    except ImportError:
        # argcomplete not present.
        pass

    args = parser.parse_args(argv)

    try:
        getattr(args, "func")
    except AttributeError:
        info()
        parser.print_help()
        return 0
    try:
        ret = args.func(args)
    except PpgenError as e:
        dlog.debug("ppgen error", exc_info=True)
        sys.stderr.write(json.dumps(e.as_dict(), default=str) + "\n")
        return e.exit_status
    except Exception as e:
        dlog.debug("unexpected error", exc_info=True)
        sys.stderr.write(json.dumps({"error": PpgenError.code, "message": str(e)}) + "\n")
        return PpgenError.exit_status
    return 0 if ret is None else ret


if __name__ == "__main__":
    sys.exit(main())
