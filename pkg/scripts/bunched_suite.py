"""Bunched sampling: fusion and divided-difference sandwiches, and the tau -> 0 limit.

    python scripts/bunched_suite.py [--quick] [--out DIR]
"""
import argparse
from dataclasses import dataclass

from _common import output_dir, write_json

from derivsamp.bunched import BunchedConfig, tau_limit_check, verify_bunched
from derivsamp.geometry import jittered_set
from derivsamp.kernel import Domain, random_test_function


@dataclass
class BunchedSuiteConfig:
    ss: tuple = (1, 2, 4)
    taus: tuple = (1.0, 0.25)
    fractions: tuple = (0.5, 0.9)
    n_functions: int = 50
    half_width: float = 400.0
    limit_taus: tuple = (0.25, 0.125, 0.0625, 0.03125, 1e-3, 1e-6)
    out: str | None = None


def run(cfg: BunchedSuiteConfig) -> int:
    runs, ok = [], True
    for s in cfg.ss:
        for tau in cfg.taus:
            for frac in cfg.fractions:
                rep = verify_bunched(BunchedConfig(s=s, tau=tau, delta_frac=frac, half_width=cfg.half_width,
                                                   n_functions=cfg.n_functions, seed=s))
                fu, dd = rep.fusion.summary(), rep.divided.summary()
                print(f"s={s} tau={tau:<5g} frac={frac}: fusion [{fu['ratio_min']:.4f}, {fu['ratio_max']:.4f}]"
                      f" in [{fu['A_theory']:.4f}, {fu['B_theory']:.4f}]; divided [{dd['ratio_min']:.4f},"
                      f" {dd['ratio_max']:.4f}] in [{dd['A_theory']:.4f}, {dd['B_theory']:.4f}]"
                      f" (uncorrected B {dd['B_printed']:.4f}) {'pass' if rep.passed else 'FAIL'}")
                ok &= bool(rep.passed)
                runs.append(rep.summary())
    centers = jittered_set(1.0, 0.3, 40.0, seed=3)
    f = random_test_function(Domain.interval(1.0), 8, 20.0, seed=[0, 0])
    limits = {}
    for s in (0, 1, 2, 4):
        rep = tau_limit_check(f, centers, s, cfg.limit_taus)
        limits[s] = {"limit": rep.limit, "rows": rep.rows()}
        print(f"tau -> 0, s={s}: " + " ".join(f"{r['tau']:.0e}:{r['deviation']:.1e}" for r in rep.rows()))
    write_json(output_dir(cfg.out) / "bunched_suite.json", cfg, {"runs": runs, "tau_limit": limits})
    return 0 if ok else 1


if __name__ == "__main__":
    ap = argparse.ArgumentParser(description=__doc__.splitlines()[0])
    ap.add_argument("--quick", action="store_true")
    ap.add_argument("--out")
    a = ap.parse_args()
    cfg = BunchedSuiteConfig(out=a.out)
    if a.quick:
        cfg.n_functions, cfg.half_width = 10, 200.0
    raise SystemExit(run(cfg))
