from dargs import Argument


def format_version_arginfo(current: str) -> Argument:
    """Generate arginfo for the ``format_version`` key of ppgen files.

    Parameters
    ----------
    current : str
        the version written by this release

    Returns
    -------
    Argument
        arginfo
    """
    doc_format_version = (
        f"Version of the file format, currently {current}. Files with a newer "
        "major version are rejected."
    )
    return Argument(
        "format_version", str, optional=True, default=current, doc=doc_format_version
    )


def projection_jdata_arginfo() -> Argument:
    """Generate arginfo for projection spec files, the ``--spec-file`` of `ppgen project`.

    Returns
    -------
    Argument
        arginfo
    """
    from ppgen.projection.project import PROJECTION_FORMAT_VERSION

    doc_specs = "List of projections."
    doc_name = "Name of the projection, used in the spec_name column of the output."
    doc_x = (
        "x axis: map from Likert variable ID to its non-negative weight; "
        "weights sum to 1."
    )
    doc_y = "y axis, in the same form as x."
    doc_projection = "Projection specs for `ppgen project`."
    spec_fields = [
        Argument("name", str, doc=doc_name),
        Argument("x", dict, doc=doc_x),
        Argument("y", dict, doc=doc_y),
    ]
    return Argument(
        "projection_jdata",
        dict,
        sub_fields=[
            format_version_arginfo(PROJECTION_FORMAT_VERSION),
            Argument("specs", list, repeat=True, sub_fields=spec_fields, doc=doc_specs),
        ],
        doc=doc_projection,
    )
