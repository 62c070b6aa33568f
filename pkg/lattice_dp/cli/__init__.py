"""
The `lattice-dp` command group. Reports go to stdout as sorted-key JSON; logs go to stderr.

Exit codes: 0 ok, 1 verification failure, 2 input parse error, 3 dimension error,
4 method/norm incompatibility.
"""
import csv
import functools
import json
import sys

import click

from .. import create_app, logger
from ..models import RunReport
from ..schemas import InstanceSchema, RunReportSchema
from ..utils.exceptions import InputParseError, LatticeDPError
from ..utils.helpers import inputs_digest
from ..validation import validate_instance_input

PARSE_ERROR_EXIT = InputParseError.exit_code


@click.group(name="lattice-dp")
def cli():
    """Disjointness-preservation defects and DP approximants of finite lattice operators."""
    create_app()


def handle_errors(fn):
    """Map library errors to exit codes, with the diagnostic on stderr."""

    @functools.wraps(fn)
    def wrapper(*args, **kwargs):
        try:
            return fn(*args, **kwargs)
        except LatticeDPError as err:
            logger.error(f"{type(err).__name__}: {err}")
            click.echo(f"error: {err}", err=True)
            sys.exit(err.exit_code)
        except json.JSONDecodeError as err:
            logger.error(f"Malformed JSON: {err}")
            click.echo(f"error: malformed JSON: {err}", err=True)
            sys.exit(PARSE_ERROR_EXIT)

    return wrapper


def load_instance(path):
    """Read operator JSON (optionally with "meta") from a file; returns (operator, meta)."""
    with open(path, 'r', encoding='utf-8') as fh:
        data = json.load(fh)
    if not isinstance(data, dict):
        raise InputParseError("Operator JSON must be an object")
    loaded, errors = validate_instance_input(data)
    if errors:
        raise InputParseError(f"Invalid operator JSON: {errors}")
    return loaded["operator"], loaded["meta"]


def dump_instance(operator, meta) -> dict:
    return InstanceSchema().dump({
        "domain": operator.domain,
        "codomain": operator.codomain,
        "matrix": operator.matrix,
        "meta": meta,
    })


def write_json(path, payload):
    with open(path, 'w', encoding='utf-8') as fh:
        fh.write(json.dumps(payload, sort_keys=True, indent=2))
        fh.write("\n")


def emit(report: RunReport, csv_path=None, include_timing: bool = False):
    """Print the report as JSON and optionally write its rows as CSV."""
    schema = RunReportSchema(exclude=() if include_timing else ("timing",))
    click.echo(json.dumps(schema.dump(report), sort_keys=True))
    if csv_path:
        write_csv(csv_path, report.rows)


def write_csv(path, rows):
    """Flat projection of the rows; columns in sorted order, nested values as JSON."""
    columns = sorted({key for row in rows for key in row})
    with open(path, 'w', encoding='utf-8', newline='') as fh:
        writer = csv.DictWriter(fh, fieldnames=columns)
        writer.writeheader()
        for row in RunReportSchema().dump({"command": "", "inputs_digest": "", "rows": rows})["rows"]:
            writer.writerow({
                key: json.dumps(value, sort_keys=True) if isinstance(value, (list, dict)) else value
                for key, value in row.items()
            })


def new_report(command: str, payload) -> RunReport:
    return RunReport(command=command, inputs_digest=inputs_digest(payload))


# Import command modules to register them on the group
from . import approx, defect, example, verify  # noqa: E402,F401
