"""Perturbed Nyquist grids: ratios against the perturbed frame bounds.

    python scripts/perturbation.py [--out DIR]
"""
import argparse
import math
from dataclasses import dataclass

from _common import output_dir, write_json

from derivsamp.constants import density_bound_1d
from derivsamp.harness import PerturbConfig, perturb_experiment


@dataclass
class PerturbSuiteConfig:
    fractions: tuple = (0.0, 0.25, 0.5, 0.75, 0.9)
    n_functions: int = 50
    half_count: int = 128
    out: str | None = None


def run(cfg: PerturbSuiteConfig) -> int:
    rows, ok = [], True
    # k = 0: Shannon grid with A = B = 1; k = 1: the same grid with univariate bounds
    bases = [(0, "shannon", 1.0), (1, "theorem", (math.pi / 2) / density_bound_1d(1))]
    for k, base, dfrac in bases:
        for frac in cfg.fractions:
            rep = perturb_experiment(PerturbConfig(k=k, base=base, delta_frac=dfrac, epsilon_frac=frac,
                                                   n_functions=cfg.n_functions, half_count=cfg.half_count))
            s = rep.summary()
            eps = s["config"]["resolved_epsilon"]
            print(f"k={k} eps={eps:.4g} ({frac:.0%} of {s['config']['epsilon_limit']:.4g}): "
                  f"ratios [{s['ratio_min']:.4f}, {s['ratio_max']:.4f}] in [{s['A_theory']:.4g},"
                  f" {s['B_theory']:.4g}] {s['verdict']}")
            ok &= s["verdict"] == "pass"
            rows.append(s)
    write_json(output_dir(cfg.out) / "perturbation.json", cfg, {"runs": rows})
    return 0 if ok else 1


if __name__ == "__main__":
    ap = argparse.ArgumentParser(description=__doc__.splitlines()[0])
    ap.add_argument("--out")
    raise SystemExit(run(PerturbSuiteConfig(out=ap.parse_args().out)))
