"""Command-line front end: constant tables, verification runs and sweeps.

    derivsamp constants --table C --k 0..26 --d 1..5 --compare-reference
    derivsamp verify frame1d --W 1 --k 1 --delta 0.5 --seed 7
    derivsamp sweep tau --s 2 --tau 1/4,1/8,1/16

Every artifact embeds the resolved configuration. Output goes to --output,
else to $DERIVSAMP_OUTPUT_DIR/<name>.<ext>, else to stdout.
"""
from __future__ import annotations

import argparse
import csv
import io as _io
import json
import math
import os
import sys
from dataclasses import asdict
from pathlib import Path

import numpy as np

from . import __version__, tables
from .bunched import BunchedConfig, tau_limit_check, verify_bunched
from .errors import BoundViolation, CapabilityError, NumericalError
from .geometry import jittered_grid_nd, jittered_set
from .harness import (
    Frame1DConfig,
    FrameNDConfig,
    PerturbConfig,
    _functions,
    check_upper_lemma,
    perturb_experiment,
    shannon_check,
    stress_family,
    verify_frame_1d,
    verify_frame_nd,
)
from .constants import density_bound_1d
from .kernel import Domain

OUTPUT_ENV = "DERIVSAMP_OUTPUT_DIR"
EXIT_FAIL = 1
EXIT_PRECONDITION = 2

LIMITS = {"k_C": 26, "d": 8, "s": 20, "k_wirtinger": 12}


# ---------------------------------------------------------------- output


def _clean(obj):
    """JSON-safe copy: numpy scalars to Python, non-finite floats to strings."""
    if isinstance(obj, dict):
        return {str(k): _clean(v) for k, v in obj.items()}
    if isinstance(obj, (list, tuple)):
        return [_clean(v) for v in obj]
    if isinstance(obj, np.ndarray):
        return [_clean(v) for v in obj.tolist()]
    if isinstance(obj, (np.bool_, bool)):
        return bool(obj)
    if isinstance(obj, np.integer):
        return int(obj)
    if isinstance(obj, (np.floating, float)):
        v = float(obj)
        return v if math.isfinite(v) else repr(v)
    return obj


def to_json(payload: dict) -> str:
    return json.dumps(_clean(payload), sort_keys=True, indent=1) + "\n"


def to_csv(config: dict, rows: list[dict]) -> str:
    buf = _io.StringIO()
    buf.write("# config: " + json.dumps(_clean(config), sort_keys=True) + "\n")
    if rows:
        w = csv.DictWriter(buf, fieldnames=list(rows[0]), lineterminator="\n")
        w.writeheader()
        for r in rows:
            w.writerow({k: (repr(float(v)) if isinstance(v, (float, np.floating)) else v) for k, v in r.items()})
    return buf.getvalue()


def emit(text: str, args, name: str, ext: str) -> None:
    path = args.output
    if path is None and os.environ.get(OUTPUT_ENV):
        path = str(Path(os.environ[OUTPUT_ENV]) / f"{name}.{ext}")
    if path is None:
        sys.stdout.write(text)
        return
    Path(path).parent.mkdir(parents=True, exist_ok=True)
    with open(path, "w", newline="\n") as fh:
        fh.write(text)
    print(f"wrote {path}", file=sys.stderr)


def _config(args, **extra) -> dict:
    skip = {"func", "output"}
    conf = {k: v for k, v in vars(args).items() if k not in skip}
    conf.update(extra)
    conf["version"] = __version__
    return conf


# ---------------------------------------------------------------- constants


_DEFAULTS = {
    "C": {"k": "0..26", "d": "1..5"},
    "wirtinger": {"k": "1..10"},
    "density1d": {"k": "0..9"},
    "bunched": {"s": "0..9", "tau": "1,1/2,1/4,1/8,1/16"},
}


def _ranges(args) -> dict:
    spec = _DEFAULTS[args.table]
    out = {}
    for key, default in spec.items():
        raw = getattr(args, key) or default
        out[key] = tables.parse_fraction_list(raw) if key == "tau" else tables.parse_int_list(raw)
    if args.table == "C":
        if max(out["k"]) > LIMITS["k_C"] or min(out["k"]) < 0:
            raise ValueError(f"k must be in 0..{LIMITS['k_C']}")
        if max(out["d"]) > LIMITS["d"] or min(out["d"]) < 1:
            raise ValueError(f"d must be in 1..{LIMITS['d']}")
    if args.table == "wirtinger" and (min(out["k"]) < 1 or max(out["k"]) > LIMITS["k_wirtinger"]):
        raise ValueError(f"k must be in 1..{LIMITS['k_wirtinger']}")
    if args.table == "density1d" and (min(out["k"]) < 0 or max(out["k"]) > LIMITS["k_wirtinger"] - 1):
        raise ValueError(f"k must be in 0..{LIMITS['k_wirtinger'] - 1}")
    if args.table == "bunched":
        if min(out["s"]) < 0 or max(out["s"]) > LIMITS["s"]:
            raise ValueError(f"s must be in 0..{LIMITS['s']}")
        for t in out["tau"]:
            if not 0 < tables.parse_fraction(t) <= 1:
                raise ValueError(f"tau {t} not in (0, 1]")
    return out


def _text_table(rows: list[dict], cmp_rows: list[dict]) -> str:
    cols = list(rows[0]) if rows else []
    lines = ["  ".join(f"{c:>10}" for c in cols)]
    for r in rows:
        cells = [tables.fmt4(v) if isinstance(v, float) else str(v) for v in (r[c] for c in cols)]
        lines.append("  ".join(f"{c:>10}" for c in cells))
    if cmp_rows:
        bad = [c for c in cmp_rows if not c["ok"]]
        lines.append("")
        lines.append(f"compared {len(cmp_rows)} cells, {len(bad)} beyond {tables.TOLERANCE:g}")
        for c in bad:
            lines.append(
                f"  {c['key']} {c['column']}: computed {c['computed']:.6f} published {c['reference']:.4f} "
                f"deviation {c['deviation']:.2e}" + ("" if c["branch_ok"] is not False else " (branch differs)")
            )
    return "\n".join(lines) + "\n"


def cmd_constants(args) -> int:
    ranges = _ranges(args)
    rows = tables.compute(args.table, **ranges)
    cmp_rows = []
    if args.compare_reference:
        for c in tables.compare(args.table, rows):
            cmp_rows.append({
                "key": "/".join(str(x) for x in c.key), "column": c.column, "computed": c.computed,
                "reference": c.reference, "deviation": c.deviation, "branch_ok": c.branch_ok, "ok": c.ok,
            })
        if args.table == "wirtinger":
            # 1/c_{k+1} doubles as the univariate density constant
            for c in tables.compare("density1d", tables.table_density1d([k - 1 for k in ranges["k"]])):
                cmp_rows.append({
                    "key": f"density1d/{c.key[0]}", "column": c.column, "computed": c.computed,
                    "reference": c.reference, "deviation": c.deviation, "branch_ok": None, "ok": c.ok,
                })
    conf = _config(args, resolved=ranges)
    name = f"constants-{args.table}"
    if args.format == "json":
        emit(to_json({"config": conf, "rows": rows, "comparison": cmp_rows}), args, name, "json")
    elif args.format == "csv":
        emit(to_csv(conf, rows), args, name, "csv")
        if cmp_rows:
            emit(to_csv(conf, cmp_rows), _with_suffix(args, "-comparison"), name + "-comparison", "csv")
    else:
        emit(_text_table(rows, cmp_rows), args, name, "txt")
    bad = [c for c in cmp_rows if not c["ok"]]
    if bad:
        print(f"{len(bad)} cell(s) deviate from the published values by more than {tables.TOLERANCE:g}", file=sys.stderr)
        return EXIT_FAIL
    return 0


def _with_suffix(args, suffix: str):
    ns = argparse.Namespace(**vars(args))
    if args.output:
        p = Path(args.output)
        ns.output = str(p.with_name(p.stem + suffix + p.suffix))
    return ns


# ---------------------------------------------------------------- verify


def _report_payload(report, conf) -> dict:
    if hasattr(report, "divided"):
        return {
            "config": conf,
            "fusion": json.loads(report.fusion.to_json()),
            "divided": json.loads(report.divided.to_json()),
            "bounds": asdict(report.bounds),
            "verdict": {None: "exploratory", True: "pass", False: "fail"}[report.passed],
        }
    out = json.loads(report.to_json())
    out["config_cli"] = conf
    return out


def _verdict_text(payload: dict) -> str:
    def one(p, label):
        return (
            f"{label}: delta={p['delta']:.6g} A={p['A_theory']:.6g} B={p['B_theory']:.6g} "
            f"ratio=[{p['ratio_min']:.6g}, {p['ratio_max']:.6g}] tail_max={p['tail_max']:.3g} "
            f"lower_violations={p['lower_violations']} upper_violations={p['upper_violations']} "
            f"verdict={p['verdict']}"
        )

    if "divided" in payload:
        lines = [one(payload["fusion"], "fusion"), one(payload["divided"], "divided")]
        lines.append(f"B (printed form) = {payload['divided']['B_printed']:.6g}, "
                     f"ratios above it: {payload['divided']['above_B_printed']}")
        lines.append(f"verdict={payload['verdict']}")
    else:
        lines = [one(payload, payload["kind"])]
    return "config: " + json.dumps(_clean(payload.get("config_cli", payload.get("config"))), sort_keys=True) + "\n" + "\n".join(lines) + "\n"


def _upper_lemma(args) -> dict:
    domain = Domain.box(args.W, args.d) if args.d > 1 else Domain.interval(args.W)
    bound = args.delta if args.delta is not None else 0.25
    if args.d == 1:
        spacing = 2 * bound / (1 + 2 * args.jitter)
        ss = jittered_set(spacing, args.jitter * spacing, args.half_width, seed=[args.seed, 1])
        half = -ss.lo
    else:
        spacing = 2 * bound / (math.sqrt(args.d) * (1 + 2 * args.jitter))
        ss = jittered_grid_nd(spacing, args.jitter * spacing, args.half_count, args.d, 2.0, seed=[args.seed, 1])
        half = float(np.min(-ss.lo))
    fns = _functions(domain, args.n_functions, args.J, 0.5 * half, args.seed)
    rows = [check_upper_lemma(f, ss, domain) for f in fns]
    ok = all(r["ball_ok"] and r["cover_ok"] for r in rows)
    return {
        "kind": "upper-lemma",
        "rows": rows,
        "ratio_max": max(r["ratio"] for r in rows),
        "violations": sum(not (r["ball_ok"] and r["cover_ok"]) for r in rows),
        "verdict": "pass" if ok else "fail",
    }


def cmd_verify(args) -> int:
    conf = _config(args)
    try:
        if args.kind == "upper-lemma":
            payload = _upper_lemma(args) | {"config": conf}
            text = to_json(payload) if args.format == "json" else (
                f"config: {json.dumps(_clean(conf), sort_keys=True)}\n"
                f"upper-lemma: ratio_max={payload['ratio_max']:.6g} violations={payload['violations']} "
                f"verdict={payload['verdict']}\n"
            )
            emit(text, args, "verify-upper-lemma", "json" if args.format == "json" else "txt")
            return 0 if payload["verdict"] == "pass" else EXIT_FAIL
        report = _run_verify(args)
    except BoundViolation as exc:
        print(f"precondition failed: {exc}", file=sys.stderr)
        return EXIT_PRECONDITION
    payload = _report_payload(report, conf)
    text = to_json(payload) if args.format == "json" else _verdict_text(payload)
    emit(text, args, f"verify-{args.kind}", "json" if args.format == "json" else "txt")
    return 0 if report.passed in (True, None) else EXIT_FAIL


def _run_verify(args):
    common = {"n_functions": args.n_functions, "J": args.J, "seed": args.seed}
    if args.kind == "frame1d":
        cfg = Frame1DConfig(
            k=args.k, W=args.W, delta_frac=args.delta_frac, delta=args.delta, jitter_ratio=args.jitter,
            half_width=args.half_width, exploratory=args.exploratory, **common,
        )
        return verify_frame_1d(cfg)
    if args.kind == "framend":
        cfg = FrameNDConfig(
            k=args.k, d=args.d, W=args.W, q=args.q, delta_frac=args.delta_frac, jitter_ratio=args.jitter,
            half_count=args.half_count, exploratory=args.exploratory, **common,
        )
        return verify_frame_nd(cfg)
    if args.kind == "perturb":
        base = args.base or ("shannon" if args.k == 0 else "theorem")
        cfg = PerturbConfig(
            k=args.k, W=args.W, base=base, delta_frac=args.delta_frac, epsilon=args.epsilon,
            epsilon_frac=args.epsilon_frac, half_count=args.half_count_1d, **common,
        )
        return perturb_experiment(cfg)
    if args.kind == "bunched":
        cfg = BunchedConfig(
            s=args.s, tau=tables.parse_fraction(args.tau), W=args.W, delta_frac=args.delta_frac,
            delta=args.delta, jitter_ratio=args.jitter, half_width=args.half_width, offsets=args.offsets,
            exploratory=args.exploratory, **common,
        )
        return verify_bunched(cfg)
    if args.kind == "shannon":
        return shannon_check(W=args.W, half_count=args.half_count_1d, **common)
    raise ValueError(f"unknown experiment {args.kind!r}")


# ---------------------------------------------------------------- sweep


def cmd_sweep(args) -> int:
    conf = _config(args)
    if args.param == "delta":
        fracs = [float(x) for x in args.values.split(",")] if args.values else [0.02, 0.1, 0.3, 0.5, 0.7, 0.9]
        bound = density_bound_1d(args.k) / args.W
        rows = stress_family(args.k, args.W, [f * bound for f in fracs], n_functions=args.n_functions,
                             J=args.J, seed=args.seed)
        for r, f in zip(rows, fracs):
            r["delta_frac"] = f
    elif args.param == "tau":
        taus = tables.parse_fraction_list(args.values or "1/4,1/8,1/16,1/32,1/1000")
        bound = args.delta if args.delta is not None else 0.5 / args.W
        spacing = 2 * bound / (1 + 2 * args.jitter)
        centers = jittered_set(spacing, args.jitter * spacing, args.half_width, seed=[args.seed, 1])
        fns = _functions(Domain.interval(args.W), args.n_functions, args.J, 0.5 * (-centers.lo), args.seed)
        rows = []
        for i, f in enumerate(fns):
            rep = tau_limit_check(f, centers, args.s, [tables.parse_fraction(t) for t in taus])
            for row in rep.rows():
                rows.append({"function": i, "limit": rep.limit, **row})
    elif args.param == "epsilon":
        fracs = [float(x) for x in args.values.split(",")] if args.values else [0.0, 0.25, 0.5, 0.75, 0.9]
        base = args.base or ("shannon" if args.k == 0 else "theorem")
        rows = []
        for f in fracs:
            rep = perturb_experiment(PerturbConfig(
                k=args.k, W=args.W, base=base, epsilon_frac=f, half_count=args.half_count_1d,
                n_functions=args.n_functions, J=args.J, seed=args.seed,
            ))
            s = rep.summary()
            rows.append({
                "epsilon_frac": f, "epsilon": s["config"]["resolved_epsilon"], "A": s["A_theory"],
                "B": s["B_theory"], "ratio_min": s["ratio_min"], "ratio_max": s["ratio_max"],
                "tail_max": s["tail_max"], "verdict": s["verdict"],
            })
    else:
        raise ValueError(f"unknown sweep {args.param!r}")
    name = f"sweep-{args.param}"
    if args.format == "json":
        emit(to_json({"config": conf, "rows": rows}), args, name, "json")
    else:
        emit(to_csv(conf, rows), args, name, "csv")
    return 0


# ---------------------------------------------------------------- parser


def build_parser() -> argparse.ArgumentParser:
    p = argparse.ArgumentParser(prog="derivsamp", description=__doc__.splitlines()[0])
    p.add_argument("--version", action="version", version=f"derivsamp {__version__}")
    sub = p.add_subparsers(dest="command", required=True)

    c = sub.add_parser("constants", help="density constant tables")
    c.add_argument("--table", choices=tables.TABLES, required=True)
    c.add_argument("--k", help="k values, e.g. 0..26 or 0..4,8")
    c.add_argument("--d", help="dimensions, e.g. 1..5")
    c.add_argument("--s", help="bunch sizes, e.g. 0..9")
    c.add_argument("--tau", help="bunch widths, fractions allowed: 1,1/2,1/16")
    c.add_argument("--compare-reference", "--compare-paper", dest="compare_reference", action="store_true",
                   help="compare with the embedded published values (exit 1 beyond 5e-5)")
    c.add_argument("--format", choices=("text", "csv", "json"), default="text")
    c.add_argument("--output")
    c.set_defaults(func=cmd_constants)

    def experiment_args(q):
        q.add_argument("--W", type=float, default=1.0, help="half-width of the spectral interval or box")
        q.add_argument("--k", type=int, default=0)
        q.add_argument("--d", type=int, default=2)
        q.add_argument("--q", type=float, default=2.0, help="l^q norm for the density (d > 1)")
        q.add_argument("--s", type=int, default=1)
        q.add_argument("--tau", default="1")
        q.add_argument("--delta", type=float, help="explicit target density")
        q.add_argument("--delta-frac", type=float, default=0.5, help="target density as a fraction of the bound")
        q.add_argument("--jitter", type=float, default=0.25, help="jitter as a fraction of the spacing")
        q.add_argument("--half-width", type=float, default=400.0, help="1D window half-width")
        q.add_argument("--half-count", type=int, default=40, help="grid points per half-axis (d > 1)")
        q.add_argument("--half-count-1d", type=int, default=128, help="uniform 1D grid points per side")
        q.add_argument("--n-functions", type=int, default=50)
        q.add_argument("--J", type=int, default=8, help="kernels per test function")
        q.add_argument("--seed", type=int, default=0)
        q.add_argument("--base", choices=("shannon", "theorem"))
        q.add_argument("--epsilon", type=float)
        q.add_argument("--epsilon-frac", type=float, default=0.5)
        q.add_argument("--offsets", choices=("equispaced", "random"), default="equispaced")
        q.add_argument("--exploratory", action="store_true", help="allow densities above the sufficient bound")
        q.add_argument("--output")

    v = sub.add_parser("verify", help="frame-inequality experiments")
    v.add_argument("kind", choices=("frame1d", "framend", "perturb", "bunched", "shannon", "upper-lemma"))
    experiment_args(v)
    v.add_argument("--format", choices=("text", "json"), default="text")
    v.set_defaults(func=cmd_verify)

    s = sub.add_parser("sweep", help="ratio envelopes for plotting")
    s.add_argument("param", choices=("delta", "tau", "epsilon"))
    s.add_argument("--values", help="comma list: delta fractions, tau values or epsilon fractions")
    experiment_args(s)
    s.add_argument("--format", choices=("csv", "json"), default="csv")
    s.set_defaults(func=cmd_sweep)
    return p


def main(argv=None) -> int:
    args = build_parser().parse_args(argv)
    try:
        return args.func(args)
    except (ValueError, CapabilityError) as exc:
        print(f"error: {exc}", file=sys.stderr)
        return EXIT_PRECONDITION
    except NumericalError as exc:
        print(f"numerical failure: {exc}", file=sys.stderr)
        return EXIT_FAIL


if __name__ == "__main__":
    sys.exit(main())
