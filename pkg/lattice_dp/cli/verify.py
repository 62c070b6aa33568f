import time

import click

from . import cli, emit, handle_errors, new_report
from ..schemas import CheckRowSchema
from ..services.suite_service import SuiteService
from ..utils.exceptions import VerificationError


@cli.command("verify")
@click.option("--suite", type=click.Choice(SuiteService.names()), required=True)
@click.option("--seed", type=int, default=0, show_default=True)
@click.option("--trials", type=click.IntRange(min=1), default=None, help="Suite-specific trial count")
@click.option("--csv", "csv_path", type=click.Path(dir_okay=False), default=None)
@click.option("--timing", is_flag=True, help="Include wall time in the report")
@handle_errors
def verify_command(suite, seed, trials, csv_path, timing):
    """Run an inequality or counterexample suite; exits 1 if any check fails."""
    start = time.perf_counter()
    checks = SuiteService.run(suite, seed=seed, trials=trials)

    report = new_report("verify", {"suite": suite, "seed": seed, "trials": trials})
    report.rows = CheckRowSchema(many=True).dump(checks)
    report.timing = time.perf_counter() - start
    emit(report, csv_path, timing)

    failures = report.failures
    if failures:
        names = ", ".join(f"{row['check']} [{row['instance']}]" for row in failures)
        raise VerificationError(f"{len(failures)} failing checks: {names}")


