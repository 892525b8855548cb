"""Frame-inequality sandwich over a grid of derivative orders and densities.

    python scripts/frame_sandwich.py [--quick] [--out DIR]

1D: k = 0..3 at three fractions of the density bound. 2D box: k = 0, 1.
Writes frame_sandwich.json with one summary per configuration.
"""
import argparse
import time
from dataclasses import dataclass

from _common import output_dir, write_json

from derivsamp.harness import Frame1DConfig, FrameNDConfig, verify_frame_1d, verify_frame_nd


@dataclass
class SandwichConfig:
    ks_1d: tuple = (0, 1, 2, 3)
    fractions: tuple = (0.25, 0.5, 0.9)
    ks_2d: tuple = (0, 1)
    n_functions: int = 50
    half_width: float = 400.0
    half_count_2d: int = 60
    center_fraction_2d: float = 0.4
    out: str | None = None


def run(cfg: SandwichConfig) -> int:
    summaries, ok = [], True
    for k in cfg.ks_1d:
        for frac in cfg.fractions:
            t0 = time.perf_counter()
            rep = verify_frame_1d(Frame1DConfig(k=k, delta_frac=frac, half_width=cfg.half_width,
                                                n_functions=cfg.n_functions, seed=k))
            summaries.append(rep.summary() | {"seconds": time.perf_counter() - t0})
    for k in cfg.ks_2d:
        t0 = time.perf_counter()
        rep = verify_frame_nd(FrameNDConfig(k=k, half_count=cfg.half_count_2d, n_functions=cfg.n_functions,
                                            center_fraction=cfg.center_fraction_2d, seed=k))
        summaries.append(rep.summary() | {"seconds": time.perf_counter() - t0})
    for s in summaries:
        c = s["config"]
        tag = f"{s['kind']:8s} k={c['k']} delta={s['delta']:.4f}"
        print(f"{tag:34s} A={s['A_theory']:.4g} B={s['B_theory']:.4g} "
              f"ratios [{s['ratio_min']:.4f}, {s['ratio_max']:.4f}] tail_tol={s['tail_tol']:.2g} {s['verdict']}")
        ok &= s["verdict"] == "pass"
    write_json(output_dir(cfg.out) / "frame_sandwich.json", cfg, {"runs": summaries})
    return 0 if ok else 1


if __name__ == "__main__":
    ap = argparse.ArgumentParser(description=__doc__.splitlines()[0])
    ap.add_argument("--quick", action="store_true", help="10 functions, smaller windows")
    ap.add_argument("--out")
    a = ap.parse_args()
    cfg = SandwichConfig(out=a.out)
    if a.quick:
        cfg.n_functions, cfg.half_width, cfg.half_count_2d = 10, 200.0, 30
    raise SystemExit(run(cfg))
