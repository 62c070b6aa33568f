import time

import click

from . import cli, emit, handle_errors, load_instance, new_report
from ..services.defect_service import DefectService

MODES = ["indicator", "search", "mp", "lh", "sdp"]


@cli.command("defect")
@click.argument("op_file", type=click.Path(exists=True, dir_okay=False))
@click.option("--mode", type=click.Choice(MODES), default="search", show_default=True)
@click.option("--seed", type=int, default=0, show_default=True)
@click.option("--restarts", type=click.IntRange(min=1), default=None, help="Search restarts (config default)")
@click.option("--csv", "csv_path", type=click.Path(dir_okay=False), default=None)
@click.option("--timing", is_flag=True, help="Include wall time in the report")
@handle_errors
def defect_command(op_file, mode, seed, restarts, csv_path, timing):
    """Measure a defect of the operator in OP_FILE and print the estimate."""
    start = time.perf_counter()
    T, _ = load_instance(op_file)

    if mode == "indicator":
        estimate = DefectService.indicator_split_defect(T, seed=seed)
    elif mode == "search":
        estimate = DefectService.dp_defect_search(T, seed=seed, restarts=restarts)
    elif mode == "mp":
        estimate = DefectService.mp_defect_search(T, seed=seed, restarts=restarts)
    elif mode == "lh":
        estimate = DefectService.lh_defect_search(T, seed=seed, restarts=restarts)
    else:
        estimate = DefectService.sdp_atom_defect(T)

    report = new_report("defect", {"operator": T.serialize(), "mode": mode, "seed": seed, "restarts": restarts})
    report.rows.append({"mode": mode, **estimate.serialize()})
    report.timing = time.perf_counter() - start
    emit(report, csv_path, timing)
