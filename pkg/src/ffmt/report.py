"""Machine-readable records of checked identities and inequalities."""

from __future__ import annotations

import hashlib
import json
import time
from contextlib import contextmanager
from dataclasses import dataclass, field
from fractions import Fraction

RELATIONS = ("<=", ">=", "=", "ratio")


def _frac(x) -> Fraction:
    return x if isinstance(x, Fraction) else Fraction(x)


def holds(lhs, rhs, relation: str) -> bool:
    """Evaluate ``lhs relation rhs`` exactly.  "ratio" records are informational."""
    a, b = _frac(lhs), _frac(rhs)
    if relation == "<=":
        return a <= b
    if relation == ">=":
        return a >= b
    if relation == "=":
        return a == b
    if relation == "ratio":
        return True
    raise ValueError(f"unknown relation {relation!r}")


@dataclass
class Report:
    name: str
    params: dict[str, str]
    lhs: str
    rhs: str
    relation: str
    passed: bool
    wall_time_ms: int = 0

    @classmethod
    def check(cls, name: str, params: dict, lhs, rhs, relation: str,
              wall_time_ms: int = 0) -> "Report":
        a, b = _frac(lhs), _frac(rhs)
        return cls(name, {str(k): str(v) for k, v in params.items()}, str(a), str(b),
                   relation, holds(a, b, relation), wall_time_ms)

    @property
    def lhs_value(self) -> Fraction:
        return Fraction(self.lhs)

    @property
    def rhs_value(self) -> Fraction:
        return Fraction(self.rhs)

    def to_dict(self) -> dict:
        return {"name": self.name, "params": dict(self.params), "lhs": self.lhs,
                "rhs": self.rhs, "relation": self.relation, "pass": self.passed,
                "wall_time_ms": self.wall_time_ms}

    @classmethod
    def from_dict(cls, d: dict) -> "Report":
        if d["relation"] not in RELATIONS:
            raise ValueError(f"unknown relation {d['relation']!r}")
        return cls(d["name"], {str(k): str(v) for k, v in d["params"].items()},
                   str(Fraction(d["lhs"])), str(Fraction(d["rhs"])), d["relation"],
                   bool(d["pass"]), int(d.get("wall_time_ms", 0)))

    def to_json(self) -> str:
        return json.dumps(self.to_dict(), sort_keys=True)

    @classmethod
    def from_json(cls, text: str) -> "Report":
        return cls.from_dict(json.loads(text))

    def canonical(self) -> str:
        d = self.to_dict()
        del d["wall_time_ms"]
        return json.dumps(d, sort_keys=True, separators=(",", ":"))

    def line(self) -> str:
        status = "PASS" if self.passed else "FAIL"
        ps = " ".join(f"{k}={v}" for k, v in self.params.items())
        return f"{status} {self.name} [{ps}] {self.lhs} {self.relation} {self.rhs}"


def digest(reports: list[Report]) -> str:
    """SHA-256 over the canonical forms; wall times do not enter."""
    h = hashlib.sha256()
    for r in reports:
        h.update(r.canonical().encode())
        h.update(b"\n")
    return h.hexdigest()


@dataclass
class Stopwatch:
    ms: int = 0
    _t0: float = field(default=0.0, repr=False)


@contextmanager
def timed():
    """``with timed() as sw: ...`` then read ``sw.ms``."""
    sw = Stopwatch(_t0=time.perf_counter())
    try:
        yield sw
    finally:
        sw.ms = int((time.perf_counter() - sw._t0) * 1000)
