"""Published reference values for the four worked examples.

The data file is CSV with columns ``example,method,J,r,t,value``.  ``method``
is ``QLM``, ``NEWTON`` or ``EALGO`` (the external extrapolation benchmark,
which has no ``J``/``r``); ``t=inf`` rows carry the sup residual.  Values are
kept as the printed decimal strings and parsed on access.
"""

from __future__ import annotations

import csv
import io
import math
import os
from dataclasses import dataclass
from functools import lru_cache
from importlib import resources
from pathlib import Path

import numpy as np

ENV_VAR = "HAARBVP_REFDATA"
FIELDS = ("example", "method", "J", "r", "t", "value")
EALGO = "EALGO"


class MissingCell(KeyError):
    pass


@dataclass(frozen=True)
class ReferenceRecord:
    example: int
    method: str
    J: int | None
    r: int | None
    t: float
    text: str

    @property
    def value(self) -> float:
        return float(self.text)


@dataclass(frozen=True)
class ReferenceColumn:
    example: int
    method: str
    J: int | None
    t: np.ndarray
    values: np.ndarray
    r_inf: float | None = None


@dataclass(frozen=True)
class ReferenceTable:
    example: int
    method: str
    columns: dict[int, ReferenceColumn]
    ealgo: ReferenceColumn | None

    @property
    def levels(self) -> list[int]:
        return sorted(self.columns)

    def column(self, J: int) -> ReferenceColumn:
        try:
            return self.columns[J]
        except KeyError:
            raise MissingCell(f"example {self.example} {self.method} has no J={J} column") from None


@dataclass(frozen=True)
class ComparisonReport:
    t: np.ndarray
    computed: np.ndarray
    reference: np.ndarray
    diff: np.ndarray
    max_diff: float
    atol: float

    @property
    def passed(self) -> bool:
        return bool(self.max_diff <= self.atol)


def default_path() -> Path:
    override = os.environ.get(ENV_VAR)
    if override:
        return Path(override)
    return Path(str(resources.files("haarbvp") / "data" / "reference.csv"))


def _opt_int(s: str) -> int | None:
    return int(s) if s.strip() else None


def parse(text: str) -> list[ReferenceRecord]:
    reader = csv.DictReader(io.StringIO(text))
    if tuple(reader.fieldnames or ()) != FIELDS:
        raise ValueError(f"reference header must be {','.join(FIELDS)}, got {reader.fieldnames}")
    out = []
    for row in reader:
        out.append(
            ReferenceRecord(
                example=int(row["example"]),
                method=row["method"].strip().upper(),
                J=_opt_int(row["J"]),
                r=_opt_int(row["r"]),
                t=float(row["t"]),
                text=row["value"].strip(),
            )
        )
    return out


def serialize(records: list[ReferenceRecord]) -> str:
    buf = io.StringIO()
    buf.write(",".join(FIELDS) + "\n")
    for rec in records:
        t = "inf" if math.isinf(rec.t) else repr(rec.t)
        J = "" if rec.J is None else str(rec.J)
        r = "" if rec.r is None else str(rec.r)
        buf.write(f"{rec.example},{rec.method},{J},{r},{t},{rec.text}\n")
    return buf.getvalue()


@lru_cache(maxsize=8)
def _load_cached(path: str) -> tuple[ReferenceRecord, ...]:
    return tuple(parse(Path(path).read_text(encoding="utf-8")))


def load(path: str | os.PathLike | None = None) -> tuple[ReferenceRecord, ...]:
    return _load_cached(str(path or default_path()))


def _method_name(method) -> str:
    return str(getattr(method, "value", method)).upper()


def lookup(example: int, method, J: int | None, t: float, path=None) -> float:
    method = _method_name(method)
    for rec in load(path):
        if (
            rec.example == example
            and rec.method == method
            and (method == EALGO or rec.J == J)
            and (rec.t == t or (not math.isinf(t) and abs(rec.t - t) < 1e-12))
        ):
            return rec.value
    raise MissingCell(f"no reference for example={example} method={method} J={J} t={t}")


def table(example: int, method, path=None) -> ReferenceTable:
    method = _method_name(method)
    recs = [r for r in load(path) if r.example == example]
    grouped: dict[int, list[ReferenceRecord]] = {}
    for rec in recs:
        if rec.method == method and rec.J is not None:
            grouped.setdefault(rec.J, []).append(rec)
    if not grouped:
        raise MissingCell(f"no reference table for example={example} method={method}")
    columns = {J: _column(example, method, J, rows) for J, rows in sorted(grouped.items())}
    ealgo_rows = [r for r in recs if r.method == EALGO]
    ealgo = _column(example, EALGO, None, ealgo_rows) if ealgo_rows else None
    return ReferenceTable(example, method, columns, ealgo)


def _column(example, method, J, rows) -> ReferenceColumn:
    finite = sorted((r for r in rows if not math.isinf(r.t)), key=lambda r: r.t)
    r_inf = [r.value for r in rows if math.isinf(r.t)]
    return ReferenceColumn(
        example=example,
        method=method,
        J=J,
        t=np.array([r.t for r in finite]),
        values=np.array([r.value for r in finite]),
        r_inf=r_inf[0] if r_inf else None,
    )


def compare(sol, ref: ReferenceColumn, atol: float) -> ComparisonReport:
    """Row-wise absolute differences between ``sol`` and a reference column."""
    t = np.asarray(sol.eval_points, dtype=float)
    if t.shape != ref.t.shape or not np.allclose(t, ref.t, rtol=0, atol=1e-12):
        raise ValueError("solution grid does not match the reference t-grid")
    computed = np.asarray(sol.y, dtype=float)
    diff = np.abs(computed - ref.values)
    return ComparisonReport(t, computed, ref.values, diff, float(diff.max()), atol)
