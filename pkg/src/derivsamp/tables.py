"""Constant tables and their comparison with the embedded published values."""
from __future__ import annotations

import csv
import io as _io
from dataclasses import dataclass
from decimal import ROUND_HALF_EVEN, Decimal
from fractions import Fraction
from importlib import resources

from .bunched import bunched_constant
from .constants import constant_C, density_bound_1d
from .wirtinger import wirtinger_constant

TOLERANCE = 5e-5  # half a unit in the 4th published decimal

TABLES = ("C", "wirtinger", "density1d", "bunched")
_FILES = {
    "C": "table_C.csv",
    "wirtinger": "table_wirtinger.csv",
    "density1d": "table_density1d.csv",
    "bunched": "table_bunched.csv",
}
# key columns and the value columns compared for every table
_KEYS = {"C": ("k", "d"), "wirtinger": ("k",), "density1d": ("k",), "bunched": ("s", "tau")}
_VALUES = {"C": ("C",), "wirtinger": ("c_k", "inv_c_k"), "density1d": ("C",), "bunched": ("H",)}


def parse_int_list(text: str) -> list[int]:
    """'0..4,8,13..14' -> [0, 1, 2, 3, 4, 8, 13, 14]."""
    out: list[int] = []
    for part in str(text).split(","):
        part = part.strip()
        if not part:
            continue
        if ".." in part:
            a, b = part.split("..")
            a, b = int(a), int(b)
            if b < a:
                raise ValueError(f"empty range {part!r}")
            out.extend(range(a, b + 1))
        else:
            out.append(int(part))
    return out


def parse_fraction(text: str) -> float:
    """'1/16' or '0.0625' -> 0.0625."""
    return float(Fraction(str(text).strip()))


def parse_fraction_list(text: str) -> list[str]:
    """Keep the labels as typed (so '1/16' stays '1/16'); validate them."""
    labels = [p.strip() for p in str(text).split(",") if p.strip()]
    for p in labels:
        parse_fraction(p)
    return labels


def fmt4(x: float) -> str:
    """Four decimals, ties to even."""
    return str(Decimal(repr(float(x))).quantize(Decimal("0.0001"), rounding=ROUND_HALF_EVEN))


# ---------------------------------------------------------------- compute


def table_C(ks, ds) -> list[dict]:
    rows = []
    for d in ds:
        for k in ks:
            c = constant_C(k, d)
            rows.append({"k": k, "d": d, "C": c.value, "branch": c.branch})
    return rows


def table_wirtinger(ks) -> list[dict]:
    rows = []
    for k in ks:
        c = wirtinger_constant(k)
        rows.append({"k": k, "c_k": c, "inv_c_k": 1.0 / c})
    return rows


def table_density1d(ks) -> list[dict]:
    return [{"k": k, "C": density_bound_1d(k)} for k in ks]


def table_bunched(ss, taus) -> list[dict]:
    return [{"s": s, "tau": t, "H": bunched_constant(s, parse_fraction(t))} for t in taus for s in ss]


def compute(name: str, **ranges) -> list[dict]:
    if name == "C":
        return table_C(ranges["k"], ranges["d"])
    if name == "wirtinger":
        return table_wirtinger(ranges["k"])
    if name == "density1d":
        return table_density1d(ranges["k"])
    if name == "bunched":
        return table_bunched(ranges["s"], ranges["tau"])
    raise ValueError(f"unknown table {name!r}")


# ---------------------------------------------------------------- reference


def _key(name: str, row: dict) -> tuple:
    out = []
    for col in _KEYS[name]:
        v = row[col]
        out.append(parse_fraction(v) if col == "tau" else int(v))
    return tuple(out)


def load_reference(name: str) -> dict[tuple, dict]:
    text = resources.files("derivsamp.data").joinpath(_FILES[name]).read_text()
    body = "\n".join(ln for ln in text.splitlines() if not ln.startswith("#"))
    return {_key(name, r): r for r in csv.DictReader(_io.StringIO(body))}


@dataclass(frozen=True)
class CellDeviation:
    table: str
    key: tuple
    column: str
    computed: float
    reference: float
    branch_ok: bool | None = None

    @property
    def deviation(self) -> float:
        return abs(self.computed - self.reference)

    @property
    def ok(self) -> bool:
        return self.deviation <= TOLERANCE and self.branch_ok is not False


def compare(name: str, rows: list[dict]) -> list[CellDeviation]:
    """Per-cell deviations for the computed rows that have a published counterpart."""
    ref = load_reference(name)
    out = []
    for row in rows:
        key = _key(name, row)
        if key not in ref:
            continue
        for col in _VALUES[name]:
            branch_ok = None
            if name == "C":
                branch_ok = row["branch"] == ref[key]["branch"]
            out.append(CellDeviation(name, key, col, float(row[col]), float(ref[key][col]), branch_ok))
    return out


def reference_ranges(name: str) -> dict:
    """Index ranges covering every published cell of a table."""
    keys = sorted(load_reference(name))
    if name == "C":
        return {"k": sorted({k for k, _ in keys}), "d": sorted({d for _, d in keys})}
    if name == "bunched":
        ref = load_reference(name)
        taus = list(dict.fromkeys(ref[k]["tau"] for k in ref))
        return {"s": sorted({k[0] for k in keys}), "tau": taus}
    return {"k": [k[0] for k in keys]}
