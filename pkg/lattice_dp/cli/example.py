import json
import math
import time

import click

from . import cli, dump_instance, emit, handle_errors, new_report, write_json
from ..models import LatticeSpace, parse_exponent
from ..services.instance_service import InstanceService


@cli.command("example")
@click.option("--kind", type=click.Choice(["graph", "walsh", "perturbed"]), required=True)
@click.option("--N", "N", type=int, default=2, show_default=True, help="graph: vertices minus one")
@click.option("--p", "p", default="1", show_default=True, help="graph: domain exponent")
@click.option("--q", "q", default="2", show_default=True, help="graph: codomain exponent")
@click.option("--kmin", type=int, default=3, show_default=True, help="walsh: first level")
@click.option("--kmax", type=int, default=6, show_default=True, help="walsh: last level")
@click.option("--n", "n", type=int, default=4, show_default=True, help="perturbed: domain dimension")
@click.option("--m", "m", type=int, default=8, show_default=True, help="perturbed: codomain dimension")
@click.option("--eta", type=float, default=1e-3, show_default=True, help="perturbed: perturbation size")
@click.option("--domain-p", default="1", show_default=True, help="perturbed: domain exponent")
@click.option("--codomain-p", default="1", show_default=True, help="perturbed: codomain exponent")
@click.option("--seed", type=int, default=0, show_default=True)
@click.option("--out", type=click.Path(dir_okay=False), default=None, help="Write the instance JSON here")
@click.option("--csv", "csv_path", type=click.Path(dir_okay=False), default=None)
@click.option("--timing", is_flag=True, help="Include wall time in the report")
@handle_errors
def example_command(kind, N, p, q, kmin, kmax, n, m, eta, domain_p, codomain_p, seed, out, csv_path, timing):
    """
    Generate an explicit instance. With --out the instance JSON goes to the file and a report
    to stdout; without it the instance JSON itself is printed.
    """
    start = time.perf_counter()
    if kind == "graph":
        inst = InstanceService.graph_operator(N, p, q)
        params = {"N": N, "p": p, "q": q}
    elif kind == "walsh":
        inst = InstanceService.walsh_operator(kmin, kmax)
        params = {"kmin": kmin, "kmax": kmax}
    else:
        inst = InstanceService.perturbed_dp_instance(
            n, m, eta, seed=seed,
            domain=_space(n, domain_p), codomain=_space(m, codomain_p),
        )
        params = {"n": n, "m": m, "eta": eta, "seed": seed, "domain_p": domain_p, "codomain_p": codomain_p}

    T = inst.operator
    document = dump_instance(T, inst.meta())
    if not out:
        click.echo(json.dumps(document, sort_keys=True))
        return

    write_json(out, document)
    report = new_report("example", {"kind": kind, **params})
    report.rows.append({"kind": kind, "domain_dim": T.n, "codomain_dim": T.m, "out": out, **inst.meta()})
    report.timing = time.perf_counter() - start
    emit(report, csv_path, timing)


def _space(dim, p):
    p = parse_exponent(p)
    return LatticeSpace.sup(dim) if math.isinf(p) else LatticeSpace.lp(dim, p)
