import time

import click

from . import cli, emit, handle_errors, load_instance, new_report, write_json
from ..services.approx_service import ApproxService
from ..utils.exceptions import InputParseError

METHODS = ["phi", "truncate", "threshold", "l1", "lq"]


@cli.command("approx")
@click.argument("op_file", type=click.Path(exists=True, dir_okay=False))
@click.option("--method", type=click.Choice(METHODS), required=True)
@click.option("--eps", type=float, default=None, help="DP defect bound; defaults to eps_analytic from the file's meta")
@click.option("--seed", type=int, default=0, show_default=True)
@click.option("--out", type=click.Path(dir_okay=False), default=None, help="Write the ApproxResult JSON here")
@click.option("--csv", "csv_path", type=click.Path(dir_okay=False), default=None)
@click.option("--timing", is_flag=True, help="Include wall time in the report")
@handle_errors
def approx_command(op_file, method, eps, seed, out, csv_path, timing):
    """Build a disjointness-preserving approximant of the operator in OP_FILE."""
    start = time.perf_counter()
    T, meta = load_instance(op_file)
    if eps is None:
        eps = meta.get("eps_analytic")
    if eps is not None and eps < 0:
        raise InputParseError(f"--eps must be nonnegative, got {eps}")

    if method == "phi":
        result = ApproxService.construct_dp_linfty(T, eps)
    elif method == "truncate":
        result = ApproxService.construct_dp_supnorm_target(T, eps)
    elif method == "threshold":
        if eps is None:
            raise InputParseError("--method threshold needs --eps (or eps_analytic in the file's meta)")
        result = ApproxService.construct_dp_threshold(T, eps)
    elif method == "l1":
        result = ApproxService.approximate_l1_target(T, eps, seed=seed)
    else:
        result = ApproxService.approximate_lq_target(T, eps=eps, seed=seed)

    payload = result.serialize()
    if out:
        write_json(out, payload)

    report = new_report("approx", {"operator": T.serialize(), "method": method, "eps": eps, "seed": seed})
    report.rows.append({
        "method": result.method.value,
        "distance": result.distance,
        "bound": result.bound,
        "dominated": result.dominated,
        "certified": result.certified,
        "distance_exact": result.distance_exact,
        "eps_used": result.eps_used,
        "is_dp": result.S.is_dp(),
    })
    report.timing = time.perf_counter() - start
    emit(report, csv_path, timing)
