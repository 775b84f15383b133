"""Verification suites: each returns a list of Reports in a fixed order."""

from __future__ import annotations

import math
import os
from fractions import Fraction
from pathlib import Path
from typing import Callable

from .errors import SieveFileError
from .fordsum import LN2_LOWER, cs_pipeline_report, ford_sum, lambda_sequence, lsum
from .gfpoly import FieldSpec, Poly, enumerate_monics, field_from_q, poly_parse, unit_residues
from .mtable import DELTA, APSpec, disjoint_classes_check, h_count, h_count_scan, m_table_count, mark_product_set
from .report import Report, timed
from .rough import (
    equidistribution_ratio,
    psi,
    psi_recursion_report,
    selberg_upper_bound_report,
    selberg_weights,
)
from .sieve import SPFTable, build_spf, pi, pi_formula, ppt_sandwich

SUITES = ("products", "pi", "selberg", "rough", "equidist", "mtable", "disjoint", "ford", "delta")

EXAMPLE_ROWS = ("T^3+1", "T^3+T+1", "T^3+T^2+1", "T^3+T^2+T+1")
EXAMPLE_COLS = ("T^3+T+1", "T^3+T^2+T+1")
EXAMPLE_PRODUCTS = (
    ("T^6+T^4+T+1", "T^6+T^5+T^4+T^2+T+1"),
    ("T^6+T^2+1", "T^6+T^5+T^3+1"),
    ("T^6+T^5+T^4+T^3+T^2+T+1", "T^6+T^3+T+1"),
    ("T^6+T^5+T^3+1", "T^6+T^4+T^2+1"),
)
EXAMPLE_REPEAT = "T^6+T^5+T^3+1"

DELTA_PRINTED = Fraction("0.08607")


class TableCache:
    """Sieve tables per field, grown on demand and optionally kept on disk."""

    def __init__(self, directory: str | Path | None = None):
        self.directory = Path(directory) if directory else None
        self._tables: dict[FieldSpec, SPFTable] = {}

    @classmethod
    def from_env(cls) -> "TableCache":
        return cls(os.environ.get("FFMT_SIEVE_DIR") or None)

    def _path(self, field: FieldSpec, max_deg: int) -> Path:
        return self.directory / f"spf-p{field.p}-e{field.e}-r{field.reduction_index}-d{max_deg}.ffmt"

    def get(self, field: FieldSpec, max_deg: int) -> SPFTable:
        have = self._tables.get(field)
        if have is not None and have.max_deg >= max_deg:
            return have
        table = None
        if self.directory is not None:
            path = self._path(field, max_deg)
            if path.exists():
                try:
                    table = SPFTable.load(path)
                except SieveFileError:
                    table = None
        if table is None:
            table = build_spf(field, max_deg)
            if self.directory is not None:
                self.directory.mkdir(parents=True, exist_ok=True)
                table.save(self._path(field, max_deg))
        self._tables[field] = table
        return table


def _stamp(reports: list[Report], ms: int) -> list[Report]:
    for r in reports:
        r.wall_time_ms = ms
    return reports


def _max_n_for(q: int, max_n: int, log2_cap: int = 26) -> int:
    return min(max_n, int(log2_cap / math.log2(q)))


# ---------------------------------------------------------------------------

def products_suite(_field: FieldSpec, _max_n: int, _tables: TableCache) -> list[Report]:
    F2 = field_from_q(2)
    P = lambda s: poly_parse(s, F2)  # noqa: E731
    out = []
    with timed() as sw:
        omega1 = APSpec(3, F2.one, F2.T)
        omega2 = APSpec(3, P("T+1"), P("T^2"))
        hits = mark_product_set(omega1, omega2)
        params = {"q": 2, "n": 6}
        out.append(Report.check("products.count", params, hits.count(), 7, "="))
        members1 = sorted(omega1.members(), key=lambda G: G.code())
        members2 = sorted(omega2.members(), key=lambda G: G.code())
        out.append(Report.check("products.rows", params,
                                int(members1 == [P(s) for s in EXAMPLE_ROWS]), 1, "="))
        out.append(Report.check("products.cols", params,
                                int(members2 == [P(s) for s in EXAMPLE_COLS]), 1, "="))
        repeat = 0
        for r, row in enumerate(EXAMPLE_ROWS):
            for c, col in enumerate(EXAMPLE_COLS):
                prod = P(row) * P(col)
                expect = P(EXAMPLE_PRODUCTS[r][c])
                out.append(Report.check("products.entry", dict(params, row=row, col=col),
                                        int(prod == expect and prod in hits), 1, "="))
                repeat += prod == P(EXAMPLE_REPEAT)
        out.append(Report.check("products.repeat", dict(params, product=EXAMPLE_REPEAT),
                                repeat, 2, "="))
    return _stamp(out, sw.ms)


def pi_suite(field: FieldSpec, max_n: int, tables: TableCache) -> list[Report]:
    q = field.q
    top = _max_n_for(q, max_n)
    out = []
    with timed() as sw:
        table = tables.get(field, top)
        for n in range(1, top + 1):
            count = pi(field, n, table)
            params = {"q": q, "n": n}
            out.append(Report.check("pi.formula", params, count, pi_formula(field, n), "="))
            lower, upper = ppt_sandwich(q, n, count)
            qn = q ** n
            out.append(Report.check("pi.ppt_lower", dict(params, rhs="ceil"), n * count,
                                    qn - math.isqrt(4 * qn), ">="))
            out.append(Report.check("pi.ppt_upper", params, count, Fraction(qn, n), "<="))
            if not (lower and upper):
                out[-1].passed = out[-2].passed = False
    return _stamp(out, sw.ms)


def selberg_suite(field: FieldSpec, max_n: int, tables: TableCache) -> list[Report]:
    q = field.q
    top = _max_n_for(q, max_n)
    out = []
    with timed() as sw:
        table = tables.get(field, top)
        for z in range(1, min(5, top) + 1):
            w = selberg_weights(field, z, table)
            params = {"q": q, "z": z}
            out.append(Report.check("selberg.QS", params, w.Q * w.S, 1, "="))
            out.append(Report.check("selberg.local_min", params, int(w.locally_minimal(Fraction(1, 7))),
                                    1, "="))
        for n in range(2, top + 1):
            for z in range(1, n // 2 + 1):
                out.extend(selberg_upper_bound_report(field, n, z, table))
    return _stamp(out, sw.ms)


def rough_suite(field: FieldSpec, max_n: int, tables: TableCache) -> list[Report]:
    q = field.q
    top = _max_n_for(q, max_n)
    out = []
    with timed() as sw:
        table = tables.get(field, top)
        for n in range(2, top + 1):
            for b in range(1, n):
                out.extend(psi_recursion_report(field, n, b, table))
                if 2 * b > n:
                    out.append(Report.check("psi.prime", {"q": q, "n": n, "b": b},
                                            psi(field, n, b, table), pi(field, n, table), "="))
        if q == 2 and top >= 4:
            out.append(Report.check("psi.spot", {"q": 2, "n": 4, "b": 1}, psi(field, 4, 1, table),
                                    4, "="))
    return _stamp(out, sw.ms)


EQUIDIST_BOUND = 4
EQUIDIST_FACTORS = ("T", "T+1", "T^2+T+1")


def equidist_moduli(field: FieldSpec, max_degree: int) -> list[Poly]:
    """Squarefree products of distinct factors from EQUIDIST_FACTORS, 1 <= degree <= max_degree."""
    base = [poly_parse(s, field) for s in EQUIDIST_FACTORS]
    out = []
    for mask in range(1, 1 << len(base)):
        M = field.one
        for i, P in enumerate(base):
            if mask >> i & 1:
                M = M * P
        if M.degree <= max_degree:
            out.append(M)
    return sorted(out, key=lambda M: M.code())


def equidist_suite(_field: FieldSpec, max_n: int, tables: TableCache) -> list[Report]:
    F2 = field_from_q(2)
    top = min(max_n, 20)
    out = []
    with timed() as sw:
        if top >= 8:
            table = tables.get(F2, top)
        for n in range(8, top + 1):
            for b in range(3, n // 2 + 1):
                for M in equidist_moduli(F2, b // 3):
                    hi, lo, _ = equidistribution_ratio(F2, n, b, M, table)
                    params = {"q": 2, "n": n, "b": b, "M": M}
                    if lo == 0:
                        out.append(Report.check("equidist.min_positive", params, lo, 1, ">="))
                    else:
                        out.append(Report.check("equidist.ratio", params, Fraction(hi, lo),
                                                EQUIDIST_BOUND, "<="))
    return _stamp(out, sw.ms)


def mtable_suite(field: FieldSpec, max_n: int, tables: TableCache) -> list[Report]:
    q = field.q
    top = _max_n_for(q, max_n)
    out = []
    with timed() as sw:
        table = tables.get(field, top)
        for n in range(1, top + 1):
            for b in range(1, n // 2 + 1):
                out.append(Report.check("h.marking_vs_scan", {"q": q, "n": n, "b": b},
                                        h_count(field, n, b), h_count_scan(field, n, b, table), "="))
        if q == 2 and top >= 4:
            out.append(Report.check("h.spot", {"q": 2, "n": 4, "b": 2}, h_count(field, 4, 2), 9, "="))
            out.append(Report.check("m.spot", {"q": 2, "n": 2}, m_table_count(field, 2), 9, "="))
    return _stamp(out, sw.ms)


def disjoint_suite(field: FieldSpec, max_n: int, _tables: TableCache) -> list[Report]:
    q = field.q
    top = min(max_n, 12, int(12 / math.log2(q)))
    out = []
    with timed() as sw:
        moduli = [M for d in range(1, 4) for M in enumerate_monics(field, d)]
        for n in range(2, top + 1):
            for b in range(1, n // 2 + 1):
                for M in moduli:
                    for A in unit_residues(M):
                        disjoint, total, bound = disjoint_classes_check(field, n, b, A, M)
                        params = {"q": q, "n": n, "b": b, "A": A, "M": M}
                        out.append(Report.check("disjoint.pairwise", params, int(disjoint), 1, "="))
                        out.append(Report.check("disjoint.sum", params, total, bound, "<="))
    return _stamp(out, sw.ms)


def ford_suite(field: FieldSpec, max_n: int, tables: TableCache) -> list[Report]:
    q = field.q
    top = _max_n_for(q, max_n)
    out = []
    with timed() as sw:
        table = tables.get(field, top)
        one = field.one
        pools = lambda_sequence(field, one, 6, 64, table)
        params = {"q": q}
        if q == 2:
            out.append(Report.check("ford.lambda_prefix", params,
                                    int(pools.lambdas[:3] == (1, 4, 8)), 1, "="))
        for j in range(1, pools.J + 1):
            # strict in principle; LN2_LOWER has a denominator no q-power sum can match
            out.append(Report.check("ford.lambda_maximal", dict(params, j=j),
                                    pools.pool_sum(j) + pools.next_degree_term(j), LN2_LOWER, ">="))
            if j >= 2:
                out.append(Report.check("ford.pool_bound", dict(params, j=j), pools.pool_sum(j),
                                        LN2_LOWER, "<="))
        for N in (1, 2):
            for k in range(1, 5):
                reps = cs_pipeline_report(field, one, N, k, pools, table)
                out.extend(r for r in reps if r.name in ("cs.tau", "cs.per_v", "cs.explicit_W",
                                                         "cs.explicit_L", "cs.disjoint"))
        if q == 2 and top >= 2:
            out.append(Report.check("ford.lsum", {"q": 2, "bound": 2}, lsum(field, 2, one, table),
                                    Fraction(23, 4), "="))
        s, comp = ford_sum(1, 1)
        out.append(Report.check("ford.sum", {"N": 1, "k": 1}, s, 1, "="))
        out.append(Report.check("ford.comparator", {"N": 1, "k": 1}, comp, 1, "="))
    return _stamp(out, sw.ms)


def delta_suite(_field: FieldSpec, _max_n: int, _tables: TableCache) -> list[Report]:
    shown = Fraction(f"{DELTA:.5f}")
    return [Report.check("delta.digits", {"digits": 5}, shown, DELTA_PRINTED, "=")]


RUNNERS: dict[str, Callable[[FieldSpec, int, TableCache], list[Report]]] = {
    "products": products_suite,
    "pi": pi_suite,
    "selberg": selberg_suite,
    "rough": rough_suite,
    "equidist": equidist_suite,
    "mtable": mtable_suite,
    "disjoint": disjoint_suite,
    "ford": ford_suite,
    "delta": delta_suite,
}


def run_suite(name: str, field: FieldSpec, max_n: int, tables: TableCache | None = None) -> list[Report]:
    tables = tables or TableCache()
    names = SUITES if name == "all" else (name,)
    out: list[Report] = []
    for s in names:
        out.extend(RUNNERS[s](field, max_n, tables))
    return out
