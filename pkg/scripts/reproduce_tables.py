"""Recompute the four constant tables and compare them with the published values.

    python scripts/reproduce_tables.py [--out DIR]

Writes <table>.csv (computed values, 4-decimal and raw) and tables.json
(per-cell deviations). Exit status 1 if any cell is off by more than 5e-5.
"""
import argparse
import csv
from dataclasses import dataclass, field

from _common import output_dir, write_json

from derivsamp import tables


@dataclass
class TablesConfig:
    names: tuple = tables.TABLES
    tolerance: float = tables.TOLERANCE
    out: str | None = None
    ranges: dict = field(default_factory=dict)


def run(cfg: TablesConfig) -> int:
    out = output_dir(cfg.out)
    report, n_bad = {}, 0
    for name in cfg.names:
        ranges = tables.reference_ranges(name)
        cfg.ranges[name] = {k: list(v) for k, v in ranges.items()}
        rows = tables.compute(name, **ranges)
        with open(out / f"{name}.csv", "w", newline="") as fh:
            w = csv.DictWriter(fh, fieldnames=list(rows[0]) + ["rounded"], lineterminator="\n")
            w.writeheader()
            value = tables._VALUES[name][0]
            for r in rows:
                w.writerow(r | {"rounded": tables.fmt4(r[value])})
        cells = tables.compare(name, rows)
        bad = [c for c in cells if not c.ok]
        n_bad += len(bad)
        report[name] = {
            "cells": len(cells),
            "max_deviation": max(c.deviation for c in cells),
            "outside_tolerance": [
                {"key": list(c.key), "column": c.column, "computed": c.computed, "published": c.reference,
                 "deviation": c.deviation, "branch_ok": c.branch_ok}
                for c in bad
            ],
        }
        print(f"{name:10s} {len(cells):3d} cells, {len(bad)} outside {cfg.tolerance:g}")
    write_json(out / "tables.json", cfg, {"tables": report})
    return 1 if n_bad else 0


if __name__ == "__main__":
    ap = argparse.ArgumentParser(description=__doc__.splitlines()[0])
    ap.add_argument("--out")
    raise SystemExit(run(TablesConfig(out=ap.parse_args().out)))
