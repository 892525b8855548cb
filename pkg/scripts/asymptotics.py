"""Large-k behaviour of the density constants and the slope of 1/c_k.

    python scripts/asymptotics.py [--k-max 200] [--out DIR]
"""
import argparse
import csv
import math
from dataclasses import dataclass

from _common import output_dir, write_json

from derivsamp.bunched import bunched_constant
from derivsamp.constants import asymptotic_slopes
from derivsamp.wirtinger import slope_regression


@dataclass
class AsymptoticsConfig:
    k_max: int = 200
    step: int = 10
    s_max: int = 60
    out: str | None = None


def run(cfg: AsymptoticsConfig) -> int:
    out = output_dir(cfg.out)
    ks = sorted(set(range(0, cfg.k_max + 1, cfg.step)) | {cfg.k_max})
    tab = asymptotic_slopes(cfg.k_max, ks=ks)
    with open(out / "asymptotics.csv", "w", newline="") as fh:
        w = csv.writer(fh, lineterminator="\n")
        w.writerow(["k", "H_over_k1", "G_over_k1", "C_over_k1"])
        for r in tab.rows:
            w.writerow([r.k, repr(r.H_slope), repr(r.G_slope), repr(r.C_slope)])
    intercept, slope = slope_regression(1, 10)
    bunched = {
        str(tau): [bunched_constant(s, tau) * (1 + tau) * math.e / (s + 1) for s in range(0, cfg.s_max + 1, 10)]
        for tau in (1.0, 0.25, 1 / 16)
    }
    last = tab.at(cfg.k_max)
    print(f"k={cfg.k_max}: H/(k+1)={last.H_slope:.4f} (limit {tab.H_limit:.4f}), "
          f"G/(k+1)={last.G_slope:.4f} (limit {tab.G_limit:.4f})")
    print(f"1/c_k ~ {intercept:.4f} + {slope:.4f} k over k=1..10")
    write_json(out / "asymptotics.json", cfg, {
        "H_limit": tab.H_limit, "G_limit": tab.G_limit, "at_k_max": vars(last),
        "inv_c_slope": slope, "inv_c_intercept": intercept, "bunched_ratio_by_s": bunched,
    })
    return 0


if __name__ == "__main__":
    ap = argparse.ArgumentParser(description=__doc__.splitlines()[0])
    ap.add_argument("--k-max", type=int, default=200)
    ap.add_argument("--out")
    a = ap.parse_args()
    raise SystemExit(run(AsymptoticsConfig(k_max=a.k_max, out=a.out)))
