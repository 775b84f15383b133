"""ffmt command line.

Counters print one value; checks print one PASS/FAIL line per report.
Exit status: 0 all checks pass, 1 some check fails, 2 usage error,
3 budget or table error.
"""

from __future__ import annotations

import argparse
import csv
import json
import sys
from fractions import Fraction
from typing import Sequence

from . import fordsum, mtable, rough, sieve
from .errors import (
    BudgetExceeded,
    DegreeExceedsTable,
    FFMTError,
    PoolTooSmall,
    SieveFileError,
)
from .gfpoly import FieldSpec, Poly, field_create, field_from_q, poly_format, poly_parse
from .report import Report, digest
from .suites import SUITES, TableCache, run_suite

EXIT_OK, EXIT_CHECK, EXIT_USAGE, EXIT_RESOURCE = 0, 1, 2, 3


class UsageError(Exception):
    pass


# ---------------------------------------------------------------------------
# argument helpers
# ---------------------------------------------------------------------------

def _field(args) -> FieldSpec:
    if args.p is not None:
        return field_create(args.p, args.e or 1)
    if args.e is not None:
        raise UsageError("--e needs --p")
    return field_from_q(args.q)


def _poly(args, field: FieldSpec, name: str, default: str | None = None) -> Poly | None:
    text = getattr(args, name, None)
    if text is None:
        text = default
    if text is None:
        return None
    return poly_parse(text, field)


def _need(args, *names: str):
    for n in names:
        if getattr(args, n, None) is None:
            raise UsageError(f"--{n.replace('_', '-')} is required")


def _table(args, field: FieldSpec, degree: int) -> sieve.SPFTable:
    return args.tables.get(field, max(degree, args.max_deg or 0))


class Result:
    """What a subcommand produced: a headline value and/or check reports."""

    def __init__(self, value=None, reports: list[Report] | None = None, rows: list[dict] | None = None):
        self.value = value
        self.reports = reports or []
        self.rows = rows or []


def _str(x) -> str:
    if isinstance(x, Poly):
        return poly_format(x)
    return str(x)


# ---------------------------------------------------------------------------
# subcommands
# ---------------------------------------------------------------------------

def cmd_sieve(args, field):
    _need(args, "max_deg")
    table = args.tables.get(field, args.max_deg)
    if args.out:
        table.save(args.out)
    rows = [{"degree": d, "primes": sieve.pi(field, d, table)} for d in range(1, table.max_deg + 1)]
    return Result(sieve.table_entries(field.q, table.max_deg), rows=rows)


def cmd_pi(args, field):
    _need(args, "n")
    value = sieve.pi(field, args.n, _table(args, field, args.n))
    rep = Report.check("pi.formula", {"q": field.q, "n": args.n}, value,
                       sieve.pi_formula(field, args.n), "=")
    return Result(value, [rep])


def cmd_pi_ap(args, field):
    _need(args, "n", "mod", "res")
    M, A = _poly(args, field, "mod"), _poly(args, field, "res")
    return Result(sieve.pi_ap(field, args.n, A, M, _table(args, field, args.n)))


def cmd_psi(args, field):
    _need(args, "n", "b")
    table = _table(args, field, args.n)
    value = rough.psi(field, args.n, args.b, table)
    reps = rough.psi_recursion_report(field, args.n, args.b, table) if args.n >= 1 else []
    return Result(value, reps)


def cmd_psi_ap(args, field):
    _need(args, "n", "b", "mod", "res")
    M, A = _poly(args, field, "mod"), _poly(args, field, "res")
    table = _table(args, field, args.n)
    value = rough.psi_ap(field, args.n, args.b, A, M, table)
    hi, lo, _ = rough.equidistribution_ratio(field, args.n, args.b, M, table)
    rep = Report.check("psi.class_spread", {"q": field.q, "n": args.n, "b": args.b, "M": _str(M)},
                       hi, max(lo, 1), "ratio")
    return Result(value, [rep])


def cmd_h(args, field):
    _need(args, "n", "b")
    return Result(mtable.h_count(field, args.n, args.b, budget=args.mem_budget, threads=args.threads))


def cmd_h_ap(args, field):
    _need(args, "n", "b", "mod", "res")
    M, A = _poly(args, field, "mod"), _poly(args, field, "res")
    return Result(mtable.h_ap_count(field, args.n, args.b, A, M, args.mem_budget, args.threads))


def cmd_h_div_ap(args, field):
    _need(args, "n", "b", "mod", "res")
    M, A = _poly(args, field, "mod"), _poly(args, field, "res")
    return Result(mtable.h_divisor_ap_count(field, args.n, args.b, A, M, args.mem_budget, args.threads))


def cmd_h_two_ap(args, field):
    _need(args, "n", "b", "mod1", "res1", "mod2", "res2")
    M1, A1 = _poly(args, field, "mod1"), _poly(args, field, "res1")
    M2, A2 = _poly(args, field, "mod2"), _poly(args, field, "res2")
    return Result(mtable.h_two_ap_count(field, args.n, args.b, A1, M1, A2, M2,
                                        args.mem_budget, args.threads))


def cmd_mtable(args, field):
    _need(args, "n")
    M, A = _poly(args, field, "mod"), _poly(args, field, "res")
    M2, A2 = _poly(args, field, "mod2"), _poly(args, field, "res2")
    if (M is None) != (A is None) or (M2 is None) != (A2 is None):
        raise UsageError("give --mod with --res (and --mod2 with --res2)")
    if M2 is not None and M is None:
        raise UsageError("--mod2 needs --mod")
    return Result(mtable.m_table_count(field, args.n, A, M, A2, M2, args.mem_budget, args.threads))


def cmd_product_set(args, field):
    _need(args, "b1", "b2")
    one = "1"
    omega1 = mtable.APSpec(args.b1, _poly(args, field, "res1", one), _poly(args, field, "mod1", one))
    omega2 = mtable.APSpec(args.b2, _poly(args, field, "res2", one), _poly(args, field, "mod2", one))
    if args.export:
        hits = mtable.product_set(omega1, omega2, args.mem_budget, args.threads)
        hits.export(args.export)
        return Result(hits.count())
    return Result(mtable.product_set_count(omega1, omega2, args.mem_budget, args.threads))


def cmd_stats(args, field):
    _need(args, "poly")
    H = poly_parse(args.poly, field)
    st = mtable.divisor_stats(H, _table(args, field, H.degree))
    rows = [{"degree": d, "tau_d": c} for d, c in enumerate(st.tau_d)]
    return Result(f"tau={st.tau} W={st.W} L={st.L} degrees={sorted(st.degset)}", rows=rows)


def cmd_lambda(args, field):
    M = _poly(args, field, "mod", "1")
    cap = args.degree_cap or 64
    table = _table(args, field, args.max_deg or 1)
    pools = fordsum.lambda_sequence(field, M, args.j_max, cap, table)
    reps, rows = [], []
    for j in range(1, pools.J + 1):
        params = {"q": field.q, "M": _str(M), "j": j}
        s = pools.pool_sum(j)
        if j >= 2:
            reps.append(Report.check("lambda.pool_bound", params, s, fordsum.LN2_LOWER, "<="))
        reps.append(Report.check("lambda.maximal", params, s + pools.next_degree_term(j),
                                 fordsum.LN2_LOWER, ">="))
        rows.append({"j": j, "lambda": pools.lambdas[j - 1], "pool_size": pools.pool_size(j),
                     "pool_sum": str(s), "pool_sum_approx": float(s)})
    value = " ".join(map(str, pools.lambdas))
    if pools.truncated:
        value += " (truncated)"
    value += f" K={pools.K_empirical:.3f}"
    return Result(value, reps, rows)


def cmd_lsum(args, field):
    _need(args, "bound")
    M = _poly(args, field, "mod", "1")
    return Result(fordsum.lsum(field, args.bound, M, _table(args, field, args.bound)))


def cmd_ford_sum(args, field):
    s, comp = fordsum.ford_sum(args.N, args.k)
    rep = Report.check("ford.sum", {"N": args.N, "k": args.k}, s, comp, "ratio")
    return Result(f"{s} comparator={comp} ratio~{float(s / comp):.6g}", [rep])


def cmd_cs_pipeline(args, field):
    M = _poly(args, field, "mod", "1")
    table = _table(args, field, args.max_deg or 1)
    pools = fordsum.lambda_sequence(field, M, args.N + args.k, args.degree_cap or 64, table)
    reps = fordsum.cs_pipeline_report(field, M, args.N, args.k, pools, table)
    return Result(None, reps)


def cmd_selberg(args, field):
    _need(args, "n", "z")
    table = _table(args, field, args.n)
    w = rough.selberg_weights(field, args.z, table)
    reps = [Report.check("selberg.QS", {"q": field.q, "z": args.z}, w.Q * w.S, 1, "=")]
    reps += rough.selberg_upper_bound_report(field, args.n, args.z, table)
    return Result(f"S={w.S} Q={w.Q}", reps)


def cmd_verify(args, field):
    reps = run_suite(args.suite, field, args.max_n, args.tables)
    return Result(f"digest={digest(reps)}", reps)


def cmd_scaling(args, field):
    rows = []
    for n in range(args.n_min, args.n_max + 1):
        b = max(1, n // 2) if args.b is None else args.b
        count = mtable.h_count(field, n, b, budget=args.mem_budget, threads=args.threads)
        nat, lq = mtable.scaling_ratio(field.q, n, b, count)
        rows.append({"q": field.q, "n": n, "b": b, "count": count,
                     "ratio_natural_log": nat, "ratio_log_q": lq})
    nat = [r["ratio_natural_log"] for r in rows]
    spread = max(nat) / min(nat) if rows else 0.0
    return Result(f"window=[{min(nat):.6g}, {max(nat):.6g}] spread~{spread:.4g}", rows=rows)


COMMANDS = {
    "sieve": cmd_sieve, "pi": cmd_pi, "pi-ap": cmd_pi_ap, "psi": cmd_psi, "psi-ap": cmd_psi_ap,
    "h": cmd_h, "h-ap": cmd_h_ap, "h-div-ap": cmd_h_div_ap, "h-two-ap": cmd_h_two_ap,
    "mtable": cmd_mtable, "product-set": cmd_product_set, "stats": cmd_stats,
    "lambda": cmd_lambda, "lsum": cmd_lsum, "ford-sum": cmd_ford_sum,
    "cs-pipeline": cmd_cs_pipeline, "selberg": cmd_selberg, "verify": cmd_verify,
    "scaling": cmd_scaling,
}


# ---------------------------------------------------------------------------
# parser
# ---------------------------------------------------------------------------

class _Parser(argparse.ArgumentParser):
    def error(self, message):
        raise UsageError(message)


def build_parser() -> argparse.ArgumentParser:
    common = _Parser(add_help=False)
    g = common.add_argument_group("common")
    g.add_argument("--q", type=int, default=2, help="field size (default 2)")
    g.add_argument("--p", type=int, help="characteristic; overrides --q")
    g.add_argument("--e", type=int, help="extension degree with --p")
    g.add_argument("--n", type=int)
    g.add_argument("--b", type=int)
    g.add_argument("--mod", help="modulus, e.g. T^2+1")
    g.add_argument("--res", help="residue, e.g. T+1")
    g.add_argument("--max-deg", type=int, help="sieve table degree")
    g.add_argument("--json", metavar="PATH")
    g.add_argument("--csv", metavar="PATH")
    g.add_argument("--threads", type=int, default=1)
    g.add_argument("--mem-budget", type=int, default=sieve.DEFAULT_BUDGET,
                   help="max flags held at once (default 2^28)")

    parser = _Parser(prog="ffmt", description="Exact counting in F_q[T].")
    sub = parser.add_subparsers(dest="command", required=True, parser_class=_Parser)

    def add(name, help_):
        return sub.add_parser(name, parents=[common], help=help_)

    add("sieve", "build (and cache) the smallest-prime-factor table").add_argument("--out")
    add("pi", "number of primes of degree n")
    add("pi-ap", "primes of degree n in a residue class")
    add("psi", "b-rough monics of degree n")
    add("psi-ap", "b-rough monics of degree n in a residue class")
    add("h", "degree-n monics with a degree-b divisor")
    add("h-ap", "same, restricted to F = res mod mod")
    add("h-div-ap", "same, the degree-b divisor in the class")
    two = add("h-two-ap", "products of two residue-class families")
    for k in ("mod1", "res1", "mod2", "res2"):
        two.add_argument(f"--{k}")
    mt = add("mtable", "size of the multiplication table M(2n)")
    mt.add_argument("--mod2")
    mt.add_argument("--res2")
    ps = add("product-set", "size of a product set of two residue-class families")
    ps.add_argument("--b1", type=int)
    ps.add_argument("--b2", type=int)
    for k in ("mod1", "res1", "mod2", "res2"):
        ps.add_argument(f"--{k}")
    ps.add_argument("--export", metavar="PATH", help="write the hit set")
    add("stats", "divisor-degree statistics of one polynomial").add_argument("--poly")
    lam = add("lambda", "greedy degree thresholds and prime pools")
    lam.add_argument("--j-max", type=int, default=6)
    lam.add_argument("--degree-cap", type=int)
    add("lsum", "sum of L(H)/|H| over deg H <= bound").add_argument("--bound", type=int)
    fs = add("ford-sum", "the combinatorial sum over the vector family")
    fs.add_argument("--N", type=int, default=1)
    fs.add_argument("--k", type=int, default=1)
    cs = add("cs-pipeline", "Cauchy-Schwarz lower bound checks over the families A(v)")
    cs.add_argument("--N", type=int, default=1)
    cs.add_argument("--k", type=int, default=1)
    cs.add_argument("--degree-cap", type=int)
    sel = add("selberg", "Selberg weights and the rough-count upper bound")
    sel.add_argument("--z", type=int)
    ver = add("verify", "run verification suites")
    ver.add_argument("--suite", choices=SUITES + ("all",), default="all")
    ver.add_argument("--max-n", type=int, default=14)
    sc = add("scaling", "|H(n, b)| normalized by b^delta (1 + log b)^(3/2) / q^n")
    sc.add_argument("--n-min", type=int, default=8)
    sc.add_argument("--n-max", type=int, default=20)
    return parser


# ---------------------------------------------------------------------------
# output
# ---------------------------------------------------------------------------

def _write_json(path: str, command: str, params: dict, res: Result):
    doc = {"command": command, "params": params}
    if res.value is not None:
        doc["value"] = _str(res.value)
    if res.reports:
        doc["reports"] = [r.to_dict() for r in res.reports]
        doc["digest"] = digest(res.reports)
    if res.rows:
        doc["rows"] = [{k: (v if isinstance(v, float) else _str(v)) for k, v in row.items()}
                       for row in res.rows]
    with open(path, "w") as fh:
        json.dump(doc, fh, indent=2, sort_keys=True)
        fh.write("\n")


def _write_csv(path: str, res: Result):
    if res.rows:
        rows = res.rows
    elif res.reports:
        rows = [{"name": r.name, "params": " ".join(f"{k}={v}" for k, v in r.params.items()),
                 "lhs": r.lhs, "relation": r.relation, "rhs": r.rhs, "pass": r.passed}
                for r in res.reports]
    else:
        rows = [{"value": _str(res.value)}]
    with open(path, "w", newline="") as fh:
        w = csv.DictWriter(fh, fieldnames=list(rows[0]))
        w.writeheader()
        for row in rows:
            w.writerow({k: (f"{v:.12g}" if isinstance(v, float) else _str(v)) for k, v in row.items()})


def _print(res: Result, out):
    for r in res.reports:
        print(r.line(), file=out)
    for row in res.rows:
        print("  ".join(f"{k}={v:.6g}" if isinstance(v, float) else f"{k}={_str(v)}"
                        for k, v in row.items()), file=out)
    if res.value is not None:
        print(_str(res.value), file=out)
    if res.reports:
        bad = sum(not r.passed for r in res.reports)
        print(f"{len(res.reports) - bad}/{len(res.reports)} checks passed", file=out)


def run(argv: Sequence[str] | None = None, out=None) -> int:
    out = out or sys.stdout
    try:
        args = build_parser().parse_args(argv)
        args.tables = TableCache.from_env()
        if args.threads < 1:
            raise UsageError("--threads must be >= 1")
        field = _field(args)
        res = COMMANDS[args.command](args, field)
    except UsageError as exc:
        print(f"ffmt: usage error: {exc}", file=sys.stderr)
        return EXIT_USAGE
    except (BudgetExceeded, DegreeExceedsTable, PoolTooSmall, SieveFileError, MemoryError) as exc:
        print(f"ffmt: {type(exc).__name__}: {exc}", file=sys.stderr)
        return EXIT_RESOURCE
    except (FFMTError, ValueError) as exc:
        print(f"ffmt: usage error: {type(exc).__name__}: {exc}", file=sys.stderr)
        return EXIT_USAGE
    params = {k: _str(v) for k, v in sorted(vars(args).items())
              if k not in ("tables", "json", "csv", "command") and v is not None}
    _print(res, out)
    if args.json:
        _write_json(args.json, args.command, params, res)
    if args.csv:
        _write_csv(args.csv, res)
    return EXIT_CHECK if any(not r.passed for r in res.reports) else EXIT_OK


def main() -> None:
    sys.exit(run())


if __name__ == "__main__":
    main()
