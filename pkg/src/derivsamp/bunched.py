"""Bunched sampling: divided differences, per-cell interpolation and frame sums.

Each center x_{n,0} carries s extra points within h = tau*delta. Two scalar
sums are checked against their theoretical sandwich:

* fusion sum       sum_n int_{V_n} |p_n f|^2, p_n the degree-s interpolant
* divided-diff sum sum_n sum_m mu_{n,m} |D_{x_{n,0..m}} f|^2

Both are tested on windowed sets with the mirror-extension argument of
:mod:`derivsamp.harness`; the tails below bound the mirrored exterior part.
"""
from __future__ import annotations

import math
import warnings
from dataclasses import asdict, dataclass, field

import numpy as np
from scipy.optimize import brentq

from . import io
from .errors import BoundViolation
from .geometry import (
    BunchedSet,
    SamplingSet1D,
    bunched_set,
    bunched_weights,
    density_1d,
    jittered_set,
    weights_1d,
)
from .harness import (
    ExteriorNorms,
    FrameReport,
    _functions,
    derivative_tail,
    frame_sum,
    needed_orders,
    taylor_majorant,
)
from .kernel import Domain, TestFunction, norm_squared

# below this bunch width the divided-difference table is replaced by f^(m)/m!
CONFLUENT_H = 1e-5


# ---------------------------------------------------------------- interpolation


@dataclass
class DividedDiffTable:
    """table[i, j] = D_{x_{i-j}, ..., x_i} f; the diagonal holds the Newton coefficients."""

    points: np.ndarray
    table: np.ndarray

    @property
    def coefficients(self) -> np.ndarray:
        return np.diag(self.table).copy()

    def __call__(self, x) -> np.ndarray:
        return newton_eval(self.points, self.coefficients, x)


def divided_differences(points, values) -> DividedDiffTable:
    x = np.asarray(points, dtype=float).ravel()
    y = np.asarray(values, dtype=float).ravel()
    if x.shape != y.shape:
        raise ValueError("points and values differ in length")
    if len(np.unique(x)) != len(x):
        raise ValueError("divided differences need distinct points")
    n = len(x)
    T = np.zeros((n, n))
    T[:, 0] = y
    for j in range(1, n):
        T[j:, j] = (T[j:, j - 1] - T[j - 1 : -1, j - 1]) / (x[j:] - x[: n - j])
    return DividedDiffTable(x, T)


def _newton_coeffs(P: np.ndarray, V: np.ndarray) -> np.ndarray:
    """Row-wise Newton coefficients for bunches P (N, s+1) with values V."""
    c = np.array(V, dtype=float, copy=True)
    for j in range(1, P.shape[1]):
        c[:, j:] = (c[:, j:] - c[:, j - 1 : -1]) / (P[:, j:] - P[:, : P.shape[1] - j])
    return c


def newton_eval(points, coeffs, x) -> np.ndarray:
    """Horner evaluation of sum_m c_m prod_{l<m} (x - x_l)."""
    points = np.asarray(points, dtype=float)
    coeffs = np.asarray(coeffs, dtype=float)
    x = np.asarray(x, dtype=float)
    out = np.full_like(x, coeffs[-1])
    for m in range(len(coeffs) - 2, -1, -1):
        out = out * (x - points[m]) + coeffs[m]
    return out


def lagrange_eval(points, values, x) -> np.ndarray:
    """sum_m y_m L_m(x) with L_m(x) = prod_{l != m} (x - x_l)/(x_m - x_l)."""
    points = np.asarray(points, dtype=float)
    values = np.asarray(values, dtype=float)
    x = np.asarray(x, dtype=float)
    out = np.zeros_like(x)
    for m, (xm, ym) in enumerate(zip(points, values)):
        L = np.ones_like(x)
        for l, xl in enumerate(points):
            if l != m:
                L = L * (x - xl) / (xm - xl)
        out = out + ym * L
    return out


# ---------------------------------------------------------------- constants


def h_tilde(s: int, tau: float, z):
    return (1 + tau) ** s * np.asarray(z) ** (s + 1) / math.factorial(s + 1) * (1 + 4 * np.asarray(z) / math.pi)


def _log_h_tilde(s: int, tau: float, z: float) -> float:
    return s * math.log1p(tau) + (s + 1) * math.log(z) - math.lgamma(s + 2) + math.log1p(4 * z / math.pi)


def bunched_constant(s: int, tau: float) -> float:
    """H~_{s,tau}(1): the root of h~_{s,tau}(z) = 1."""
    if s < 0:
        raise ValueError("s must be >= 0")
    if not 0 < tau <= 1:
        raise ValueError("tau must be in (0, 1]")
    f = lambda z: _log_h_tilde(s, tau, z)
    hi = 1.0
    while f(hi) < 0:
        hi *= 2
    return brentq(f, hi / 2 if hi > 1 else 1e-6, hi, xtol=1e-12, rtol=1e-14)


@dataclass(frozen=True)
class BunchedBounds:
    q: float  # the interpolation error factor; admissible iff q < 1
    fusion_A: float
    fusion_B: float
    dd_A: float
    dd_B: float  # with the m = 0 term kept at weight 1
    dd_B_printed: float  # all terms divided by (1 + tau)^2

    @property
    def admissible(self) -> bool:
        return self.q < 1


def bunched_bounds(s: int, tau: float, delta: float, m_omega: float) -> BunchedBounds:
    x = delta * m_omega
    q = float(h_tilde(s, tau, x))
    lower = (1 - q) ** 2 if q < 1 else 0.0
    y = (1 + tau) * x
    pre = (1 + 2 * y / math.pi) ** 2
    return BunchedBounds(
        q=q,
        fusion_A=lower,
        fusion_B=(1 + q) ** 2,
        dd_A=lower / math.e,
        dd_B=pre * (1 + math.expm1(y * y) / (1 + tau) ** 2),
        dd_B_printed=pre * math.exp(y * y) / (1 + tau) ** 2,
    )


def log_combined_margin(
    s: int, k: int, tau: float, delta: float, m_omega: float, factorial: str = "joint"
) -> float:
    """Log of the Hermite (bunched + derivative) density condition; admissible iff < 0.

    ``factorial="joint"`` divides by ((s+1)(k+1))!, the factor carried by the
    Hermite remainder; ``"printed"`` divides by (s+1)!(k+1)!.
    """
    x = delta * m_omega
    n = (s + 1) * (k + 1)
    if factorial == "joint":
        lf = math.lgamma(n + 1)
    elif factorial == "printed":
        lf = math.lgamma(s + 2) + math.lgamma(k + 2)
    else:
        raise ValueError(f"unknown factorial convention {factorial!r}")
    return s * (k + 1) * math.log1p(tau) + n * math.log(x) - lf + math.log1p(4 * x / math.pi)


def combined_margin(s: int, k: int, tau: float, delta: float, m_omega: float, factorial: str = "joint") -> float:
    return math.exp(min(log_combined_margin(s, k, tau, delta, m_omega, factorial), 700.0))


def combined_density_check(
    s: int, k: int, tau: float, delta: float, m_omega: float, factorial: str = "joint"
) -> tuple[bool, float]:
    if min(tau, delta, m_omega) <= 0 or s < 0 or k < 0:
        raise ValueError("all parameters must be positive")
    margin = combined_margin(s, k, tau, delta, m_omega, factorial)
    return margin < 1, margin


def combined_density_root(s: int, k: int, tau: float, m_omega: float = 1.0, factorial: str = "joint") -> float:
    """The delta at which the combined margin equals 1."""
    g = lambda d: log_combined_margin(s, k, tau, d, m_omega, factorial)
    hi = 1.0
    while g(hi) < 0:
        hi *= 2
    lo = hi / 2
    while g(lo) > 0:
        lo /= 2
    return brentq(g, lo, hi, xtol=1e-12)


def combined_asymptote(s: int, k: int, tau: float, m_omega: float = 1.0) -> float:
    return (s + 1) * (k + 1) / ((1 + tau) * math.e * m_omega)


# ---------------------------------------------------------------- frame sums


def _gl(s: int):
    return np.polynomial.legendre.leggauss(s + 1)


def _values(f: TestFunction, P: np.ndarray) -> np.ndarray:
    return f(P.ravel()).reshape(P.shape)


def fusion_frame_sum(f: TestFunction, bs: BunchedSet) -> float:
    """sum_n int_{V_n} |p_n f|^2, Gauss-Legendre exact for degree 2s."""
    P = bs.all_points()
    c = _newton_coeffs(P, _values(f, P))
    t, w = _gl(bs.s)
    z = bs.centers.breakpoints
    half = 0.5 * np.diff(z)
    nodes = (0.5 * (z[1:] + z[:-1]))[:, None] + half[:, None] * t
    p = np.broadcast_to(c[:, -1:], nodes.shape).copy()
    for m in range(bs.s - 1, -1, -1):
        p = p * (nodes - P[:, m : m + 1]) + c[:, m : m + 1]
    return float(np.sum(half[:, None] * w * p * p))


def _confluent_coeffs(f: TestFunction, bs: BunchedSet) -> np.ndarray:
    x0 = bs.centers.points
    return np.stack(
        [f.derivative((m,), x0) / math.factorial(m) for m in range(bs.s + 1)], axis=1
    )


def divided_diff_frame_sum(f: TestFunction, bs: BunchedSet, weights=None) -> float:
    """sum_n sum_{m<=s} mu_{n,m} |D_{x_{n,0},...,x_{n,m}} f|^2."""
    mu = (weights if weights is not None else bunched_weights(bs)).values
    if bs.s > 0 and bs.h < CONFLUENT_H:
        warnings.warn(
            f"bunch width {bs.h:.3g} below {CONFLUENT_H:g}: using derivatives/m! at the centers",
            RuntimeWarning,
            stacklevel=2,
        )
        D = _confluent_coeffs(f, bs)
    else:
        P = bs.all_points()
        D = _newton_coeffs(P, _values(f, P))
    return float(np.sum(mu * D * D))


def interp_error_check(f: TestFunction, bs: BunchedSet, n_probe: int = 16) -> dict:
    """Compare |f - p_n f| on probe points of every cell with the classical bound.

    max|f^(s+1)| over a cell is taken as the sampled max plus half the probe
    spacing times the global sup of |f^(s+2)|, so the bound is rigorous.
    """
    s = bs.s
    P = bs.all_points()
    c = _newton_coeffs(P, _values(f, P))
    z = bs.centers.breakpoints
    t = np.linspace(0.0, 1.0, n_probe)
    probes = z[:-1, None] + np.diff(z)[:, None] * t
    p = np.broadcast_to(c[:, -1:], probes.shape).copy()
    for m in range(s - 1, -1, -1):
        p = p * (probes - P[:, m : m + 1]) + c[:, m : m + 1]
    err = np.abs(_values(f, probes) - p)
    W = f.domain.width
    sup_next = W ** (s + 2) * math.sqrt(W / math.pi) * math.sqrt(norm_squared(f))
    dmax = np.abs(f.derivative((s + 1,), probes.ravel())).reshape(probes.shape).max(axis=1)
    dmax = dmax + 0.5 * np.diff(z) / (n_probe - 1) * sup_next
    bound = dmax / math.factorial(s + 1) * (1 + bs.tau) ** s * bs.delta ** (s + 1)
    ratio = err.max(axis=1) / np.where(bound > 0, bound, np.inf)
    return {"max_error": float(err.max()), "max_ratio": float(ratio.max()), "ok": bool(np.all(err <= bound[:, None]))}


# ---------------------------------------------------------------- tails


def fusion_tail(ext: ExteriorNorms, s: int, tau: float, delta: float) -> float:
    """Mirrored exterior part of the fusion sum: (||f||_ext + ||f - p f||_ext)^2."""
    e = (1 + tau) ** s * delta ** (s + 1) / math.factorial(s + 1)
    return (math.sqrt(ext.exterior((0,))) + e * taylor_majorant(ext, (s + 1,), 2 * delta)) ** 2


def divided_diff_tail(ext: ExteriorNorms, s: int, tau: float, delta: float) -> float:
    """mu_{n,m} <= m! ((1+tau) delta)^{2m} meas(V_n), D = f^(m)(x~)/m!, |x - x~| <= (1+tau) delta."""
    r = (1 + tau) * delta
    return derivative_tail(ext, [(m,) for m in range(s + 1)], r, r)


# ---------------------------------------------------------------- experiments


@dataclass
class BunchedConfig:
    s: int = 1
    tau: float = 1.0
    W: float = 1.0
    delta_frac: float = 0.5  # target delta*W as a fraction of H~_{s,tau}(1)
    delta: float | None = None  # explicit target density, overrides delta_frac
    jitter_ratio: float = 0.25
    half_width: float = 400.0
    offsets: str = "equispaced"
    adapt_width: bool = True
    n_functions: int = 50
    J: int = 8
    center_fraction: float = 0.5
    seed: int = 0
    exploratory: bool = False

    def target_delta(self) -> float:
        if self.delta is not None:
            return self.delta
        return self.delta_frac * bunched_constant(self.s, self.tau) / self.W

    def build_set(self) -> BunchedSet:
        spacing = 2 * self.target_delta() / (1 + 2 * self.jitter_ratio)
        centers = jittered_set(spacing, self.jitter_ratio * spacing, self.half_width, seed=[self.seed, 1])
        return bunched_set(
            centers, self.s, self.tau, mode=self.offsets, adapt_width=self.adapt_width, seed=[self.seed, 2]
        )


@dataclass
class BunchedReport:
    fusion: FrameReport
    divided: FrameReport
    bounds: BunchedBounds

    @property
    def passed(self) -> bool | None:
        a, b = self.fusion.passed, self.divided.passed
        return None if a is None else bool(a and b)

    def summary(self) -> dict:
        return {"fusion": self.fusion.summary(), "divided": self.divided.summary(), "bounds": asdict(self.bounds)}


def run_bunched(bs: BunchedSet, domain: Domain, functions, config: dict, exploratory: bool = False) -> BunchedReport:
    W = domain.width
    delta = bs.delta
    bounds = bunched_bounds(bs.s, bs.tau, delta, W)
    ok = bounds.admissible
    mu = bunched_weights(bs)
    pmax = needed_orders(bs.s + 1, 1, 2 * delta, W)
    fr, ft, dr, dt = [], [], [], []
    for f in functions:
        n2 = norm_squared(f)
        ext = ExteriorNorms(f, bs.centers.lo, bs.centers.hi, pmax)
        fr.append(fusion_frame_sum(f, bs) / n2)
        ft.append(fusion_tail(ext, bs.s, bs.tau, delta) / n2)
        dr.append(divided_diff_frame_sum(f, bs, mu) / n2)
        dt.append(divided_diff_tail(ext, bs.s, bs.tau, delta) / n2)
    expl = exploratory or not ok
    fusion = FrameReport("fusion", config, bounds.fusion_A, bounds.fusion_B, delta, ok,
                         np.array(fr), np.array(ft), expl)
    dd = FrameReport("divided", config, bounds.dd_A, bounds.dd_B, delta, ok, np.array(dr), np.array(dt), expl)
    dd.extra["B_printed"] = bounds.dd_B_printed
    dd.extra["above_B_printed"] = int((dd.ratios > bounds.dd_B_printed).sum())
    text = io.dump_bunched(bs)
    for rep in (fusion, dd):
        if rep.exploratory:
            continue
        for i in np.flatnonzero(~(rep.lower_ok & rep.upper_ok)):
            rep.violations.append({
                "index": int(i), "ratio": float(rep.ratios[i]), "tail": float(rep.tails[i]),
                "side": "lower" if not rep.lower_ok[i] else "upper",
                "function": io.dump_test_function(functions[i]), "set": text,
            })
    return BunchedReport(fusion, dd, bounds)


def verify_bunched(cfg: BunchedConfig, bs: BunchedSet | None = None) -> BunchedReport:
    domain = Domain.interval(cfg.W)
    bs = cfg.build_set() if bs is None else bs
    bounds = bunched_bounds(bs.s, bs.tau, bs.delta, cfg.W)
    if not bounds.admissible and not cfg.exploratory:
        raise BoundViolation(
            f"delta*m_omega = {bs.delta * cfg.W:.6g} is not below H~_(s,tau)(1) = "
            f"{bunched_constant(bs.s, bs.tau):.6g} (use exploratory mode)"
        )
    L = min(-bs.centers.lo, bs.centers.hi)
    fns = _functions(domain, cfg.n_functions, cfg.J, cfg.center_fraction * L, cfg.seed)
    conf = asdict(cfg) | {"resolved_delta": bs.delta, "n_bunches": len(bs.centers)}
    return run_bunched(bs, domain, fns, conf, exploratory=cfg.exploratory)


# ---------------------------------------------------------------- tau -> 0


@dataclass
class TauLimitReport:
    s: int
    limit: float  # derivative frame sum with the limiting weights, over ||f||^2
    taus: list = field(default_factory=list)
    sums: list = field(default_factory=list)
    deviations: list = field(default_factory=list)
    confluent: list = field(default_factory=list)

    @property
    def monotone(self) -> bool:
        d = np.asarray(self.deviations)
        return bool(np.all(np.diff(d) <= 0))

    def rows(self) -> list[dict]:
        return [
            {"tau": t, "sum": s, "deviation": d, "confluent": c}
            for t, s, d, c in zip(self.taus, self.sums, self.deviations, self.confluent)
        ]


def tau_limit_check(f: TestFunction, centers: SamplingSet1D, s: int, tau_sequence, mode: str = "equispaced") -> TauLimitReport:
    """Divided-difference sums at shrinking bunch width against their tau -> 0 limit.

    The limit is sum_n sum_{m<=s} (1/m!) int_{V_n} (x - x_{n,0})^{2m} |f^(m)(x_{n,0})|^2,
    i.e. the univariate derivative frame sum of order s on the centers.
    """
    n2 = norm_squared(f)
    limit = frame_sum(f, centers.points, weights_1d(centers, s)) / n2
    rep = TauLimitReport(s, limit)
    delta = density_1d(centers)
    for tau in tau_sequence:
        bs = bunched_set(centers, s, tau, mode=mode, adapt_width=True)
        confl = s > 0 and tau * delta < CONFLUENT_H
        with warnings.catch_warnings():
            warnings.simplefilter("ignore" if confl else "default")
            val = divided_diff_frame_sum(f, bs) / n2
        rep.taus.append(float(tau))
        rep.sums.append(val)
        rep.deviations.append(abs(val - limit))
        rep.confluent.append(bool(confl))
    return rep
