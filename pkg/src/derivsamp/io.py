"""Plain-text formats for sampling sets, bunched sets and test functions.

Sampling set: optional ``# window lo... hi...`` header, then one point per
line (d whitespace-separated decimals). Bunched set: ``# window lo hi`` and
``# tau t`` headers, then ``center offset_1 ... offset_s`` per line. Test
function: a domain descriptor line, then ``c_j y_j...`` per line.
Floats are written with ``repr`` so a round trip is exact.
"""
from __future__ import annotations

import numpy as np

from .geometry import BunchedSet, SamplingSet1D, SamplingSetND
from .kernel import Domain, TestFunction


def _fmt(row) -> str:
    return " ".join(repr(float(v)) for v in np.atleast_1d(row))


def _body(text: str):
    headers, rows = {}, []
    for line in text.splitlines():
        line = line.strip()
        if not line:
            continue
        if line.startswith("#"):
            parts = line[1:].split()
            if parts:
                headers[parts[0]] = parts[1:]
            continue
        rows.append([float(v) for v in line.split()])
    return headers, rows


def dump_sampling_set(ss) -> str:
    if isinstance(ss, SamplingSet1D):
        lines = [f"# window {ss.lo!r} {ss.hi!r}"]
        lines += [repr(float(x)) for x in ss.points]
    else:
        lines = [f"# window {_fmt(ss.lo)} {_fmt(ss.hi)}", f"# norm {ss.q!r} {ss.resolution}"]
        lines += [_fmt(p) for p in ss.points]
    return "\n".join(lines) + "\n"


def load_sampling_set(text: str):
    headers, rows = _body(text)
    pts = np.array(rows, dtype=float)
    if pts.ndim == 1 or pts.shape[1] == 1:
        pts = pts.ravel()
        lo, hi = (float(v) for v in headers.get("window", [pts.min(), pts.max()]))
        return SamplingSet1D(pts, lo, hi)
    d = pts.shape[1]
    win = [float(v) for v in headers["window"]]
    q, res = headers.get("norm", ["2.0", "256"])
    return SamplingSetND(pts, win[:d], win[d:], float(q), int(res))


def dump_bunched(bs: BunchedSet) -> str:
    c = bs.centers
    lines = [f"# window {c.lo!r} {c.hi!r}", f"# tau {bs.tau!r}"]
    for x, offs in zip(c.points, bs.offsets):
        lines.append(_fmt(np.concatenate([[x], offs])))
    return "\n".join(lines) + "\n"


def load_bunched(text: str) -> BunchedSet:
    headers, rows = _body(text)
    arr = np.array(rows, dtype=float)
    lo, hi = (float(v) for v in headers["window"])
    tau = float(headers["tau"][0])
    return BunchedSet(SamplingSet1D(arr[:, 0], lo, hi), arr[:, 1:], tau)


def dump_test_function(f: TestFunction) -> str:
    lines = [f.domain.describe()]
    for c, y in zip(f.coeffs, f.centers):
        lines.append(_fmt(np.concatenate([[c], y])))
    return "\n".join(lines) + "\n"


def load_test_function(text: str) -> TestFunction:
    first, *rest = [ln for ln in text.splitlines() if ln.strip()]
    domain = Domain.parse(first)
    arr = np.array([[float(v) for v in ln.split()] for ln in rest], dtype=float)
    return TestFunction(domain, arr[:, 1:], arr[:, 0])
