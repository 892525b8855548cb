"""Density constants and closed-form frame bounds for derivative sampling.

All functions are scalar and pure. Internally most quantities are handled in
log space so that the constants stay computable for k in the hundreds
(where ``exp(z)`` and ``z**k / k!`` individually over- or underflow).
"""
from __future__ import annotations

import math
from dataclasses import dataclass
from typing import NamedTuple

from scipy.optimize import brentq

from .errors import NumericalError

# relative size of a tail-series term at which summation stops
_TAIL_EPS = 1e-18
_BRACKET_LO = 1e-8
_XTOL = 1e-13


class FrameBounds(NamedTuple):
    """Lower/upper frame bound estimates and whether the lower one is usable."""

    lower: float
    upper: float
    admissible: bool


@dataclass(frozen=True)
class ConstantQuery:
    k: int
    d: int = 1
    w: float = 1.0
    s: int = 0

    def __post_init__(self):
        if self.k < 0 or self.d < 1 or self.s < 0:
            raise ValueError(f"invalid query {self}")
        if not self.w > 0:
            raise ValueError("w must be positive")


@dataclass(frozen=True)
class BoundInputs:
    """Density, geometry and (optionally) existing frame bounds.

    ``a``, the lower norm-equivalence constant, is never needed by any bound
    implemented here and is intentionally absent.
    """

    delta: float
    m_omega: float
    b: float = 1.0
    A: float | None = None
    B: float | None = None

    def __post_init__(self):
        if not (self.delta > 0 and self.m_omega > 0 and self.b > 0):
            raise ValueError("delta, m_omega and b must be positive")
        if (self.A is None) != (self.B is None):
            raise ValueError("A and B must be given together")
        if self.A is not None and not (0 < self.A <= self.B):
            raise ValueError("need 0 < A <= B")

    @property
    def x(self) -> float:
        return self.m_omega * self.b * self.delta


def _check_z(z: float) -> float:
    z = float(z)
    if not math.isfinite(z):
        raise ValueError(f"z must be finite, got {z}")
    if z <= 0:
        raise ValueError(f"z must be positive, got {z}")
    return z


def _log_tail(k: int, z: float) -> float:
    """log of sum_{r>k} z^r / r!, summed from the leading term upwards."""
    lead = (k + 1) * math.log(z) - math.lgamma(k + 2)
    total, term, r = 1.0, 1.0, k + 1
    while True:
        r += 1
        term *= z / r
        total += term
        if term < _TAIL_EPS * total:
            break
    return lead + math.log(total)


def R_k_tail(k: int, z: float) -> float:
    """exp(z) minus its degree-k Taylor polynomial, via the tail series."""
    return math.exp(_log_tail(k, _check_z(z)))


def R_k_direct(k: int, z: float) -> float:
    """exp(z) minus its degree-k Taylor polynomial, computed literally.

    Cancels catastrophically when z is small compared with k.
    """
    z = _check_z(z)
    partial = math.fsum(z**r / math.factorial(r) for r in range(k + 1))
    return math.exp(z) - partial


def log_R_k(k: int, z: float) -> float:
    z = _check_z(z)
    if k < 0:
        raise ValueError("k must be nonnegative")
    # direct form only where it cannot cancel (z >= k, and z >= 1 for k = 0)
    if max(k, 1) <= z < 700:
        return math.log(R_k_direct(k, z))
    return _log_tail(k, z)


def eval_R_k(k: int, z: float) -> float:
    """R_k(z) = exp(z) - sum_{r<=k} z^r/r!  (> 0 for z > 0)."""
    return _exp_checked(log_R_k(k, z), f"R_{k}({z})")


def eval_sigma_star(d: int, z: float) -> float:
    if d < 1:
        raise ValueError("d must be >= 1")
    z = _check_z(z)
    return (z + math.sqrt(z * (d + z))) / d


def log_h_k(k: int, z: float) -> float:
    return z + log_R_k(k, z)


def log_g_kd(k: int, d: int, z: float) -> float:
    sig = eval_sigma_star(d, z)
    return 0.5 * d * math.log1p(2 * sig) + z / sig + log_R_k(k, z)


def _exp_checked(logv: float, what: str) -> float:
    if logv > 709.0:
        raise NumericalError(f"{what} overflows double precision (log value {logv:.1f})")
    return math.exp(logv)


def eval_h_k(k: int, z: float) -> float:
    """h_k(z) = exp(z) R_k(z)."""
    return _exp_checked(log_h_k(k, z), f"h_{k}({z})")


def eval_g_kd(k: int, d: int, z: float) -> float:
    """g_{k,d}(z) = (1 + 2 sigma*_d(z))^{d/2} exp(z / sigma*_d(z)) R_k(z)."""
    return _exp_checked(log_g_kd(k, d, z), f"g_{k},{d}({z})")


def _invert_log(logf, w: float, name: str) -> float:
    if not w > 0:
        raise ValueError("w must be positive")
    target = math.log(w)
    fn = lambda z: logf(z) - target  # noqa: E731
    lo, hi = _BRACKET_LO, 1.0
    if fn(lo) >= 0:
        raise NumericalError(f"{name}: root below bracket [{lo}, {hi}] for w={w}")
    while fn(hi) < 0:
        lo, hi = hi, 2 * hi
        if hi > 1e6:
            raise NumericalError(f"{name}: bracket expansion failed, last [{lo}, {hi}]")
    return brentq(fn, lo, hi, xtol=_XTOL, rtol=1e-15, maxiter=200)


def inverse_H_k(k: int, w: float = 1.0) -> float:
    """z with h_k(z) = w."""
    return _invert_log(lambda z: log_h_k(k, z), w, f"H_{k}")


def inverse_G_kd(k: int, d: int, w: float = 1.0) -> float:
    """z with g_{k,d}(z) = w."""
    return _invert_log(lambda z: log_g_kd(k, d, z), w, f"G_{k},{d}")


class DensityConstant(NamedTuple):
    value: float
    branch: str  # "H" or "G": which inverse attained the maximum
    H: float
    G: float


def constant_C(k: int, d: int) -> DensityConstant:
    """C(k, d) = max{H_k(1), G_{k,d}(1)} with the attaining branch."""
    if k < 0 or d < 1:
        raise ValueError("need k >= 0 and d >= 1")
    H = inverse_H_k(k, 1.0)
    G = inverse_G_kd(k, d, 1.0)
    return DensityConstant(max(H, G), "G" if G > H else "H", H, G)


def frame_bounds_dD(k: int, d: int, delta: float, m_omega: float, b: float = 1.0) -> FrameBounds:
    """Frame bounds for Voronoi-weighted derivative samples in d dimensions.

    A >= e^{-d} (1 - min{h_k(x), g_{k,d}(x)})^2 and B <= exp(2x + x^2),
    with x = m_omega * b * delta. ``admissible`` is False when x is not
    strictly below C(k, d), in which case the lower bound is meaningless.
    """
    x = m_omega * b * delta
    if x <= 0:
        return FrameBounds(math.exp(-d), 1.0, True)
    lh = min(log_h_k(k, x), log_g_kd(k, d, x))
    m = math.exp(lh) if lh < 709 else math.inf
    admissible = x < constant_C(k, d).value and m < 1
    A = math.exp(-d) * (1 - m) ** 2 if m < 1 else 0.0
    return FrameBounds(A, math.exp(2 * x + x * x), admissible)


def frame_bounds_1d(k: int, delta: float, m_omega: float) -> FrameBounds:
    """Univariate bounds built on the Wirtinger constant c_{k+1}.

    A >= e^{-1} (1 - (c_{k+1} delta m)^{k+1})^2,
    B <= (1 + 2 delta m / pi)^2 exp((delta m)^2).
    """
    from .wirtinger import wirtinger_constant

    x = delta * m_omega
    c = wirtinger_constant(k + 1)
    q = (c * x) ** (k + 1)
    admissible = x < 1.0 / c
    A = math.exp(-1) * (1 - q) ** 2 if q < 1 else 0.0
    B = (1 + 2 * x / math.pi) ** 2 * math.exp(x * x)
    return FrameBounds(A, B, admissible)


def density_bound_1d(k: int) -> float:
    """C(k) = 1 / c_{k+1}, the univariate constant (delta < C(k)/m_omega)."""
    from .wirtinger import wirtinger_constant

    return 1.0 / wirtinger_constant(k + 1)


def lambert_w_inv_e(tol: float = 1e-14) -> float:
    """Principal Lambert-W at 1/e, by Newton iteration on w e^w - 1/e."""
    target = math.exp(-1)
    w = 0.25
    for _ in range(100):
        ew = math.exp(w)
        step = (w * ew - target) / (ew * (1 + w))
        w -= step
        if abs(step) < tol:
            return w
    raise NumericalError("Lambert-W Newton iteration did not converge")


@dataclass
class AsymptoticRow:
    k: int
    H_slope: float
    G_slope: float
    C_slope: float


@dataclass
class AsymptoticTable:
    d: int
    rows: list[AsymptoticRow]
    H_limit: float  # W(1/e)
    G_limit: float  # 1/e

    def at(self, k: int) -> AsymptoticRow:
        for row in self.rows:
            if row.k == k:
                return row
        raise KeyError(k)


def asymptotic_slopes(k_max: int, d: int = 1, ks=None) -> AsymptoticTable:
    """H_k(1)/(k+1), G_{k,d}(1)/(k+1), C(k,d)/(k+1) up to k_max, with limits."""
    if k_max < 50:
        raise ValueError("k_max must be at least 50")
    if ks is None:
        ks = sorted(set(list(range(0, k_max + 1, 10)) + [k_max]))
    rows = []
    for k in ks:
        H = inverse_H_k(k)
        G = inverse_G_kd(k, d)
        rows.append(AsymptoticRow(k, H / (k + 1), G / (k + 1), max(H, G) / (k + 1)))
    return AsymptoticTable(d, rows, lambert_w_inv_e(), math.exp(-1))


def tensor_bounds(
    k: int,
    d: int,
    delta_t: float,
    m_omega_t: float,
    delta_z: float,
    m_omega_z: float,
    b: float = 1.0,
) -> FrameBounds:
    """Bounds for line-by-line sampling: temporal factor times spatial bounds.

    For d = 2 the spatial part is the univariate Wirtinger bound, for d >= 3
    the multivariate bound (used with the full dimension d, as stated).
    """
    if d < 2:
        raise ValueError("line-by-line sampling needs d >= 2")
    t = 2 * delta_t * m_omega_t / math.pi
    if d == 2:
        spatial = frame_bounds_1d(k, delta_z, m_omega_z)
    else:
        spatial = frame_bounds_dD(k, d, delta_z, m_omega_z, b)
    lower = (1 - t) ** 2 * spatial.lower if t < 1 else 0.0
    upper = (1 + t) ** 2 * spatial.upper
    return FrameBounds(lower, upper, spatial.admissible and t < 1)


def perturb_bound(A: float, B: float, m_omega: float, b: float = 1.0) -> float:
    """Largest admissible perturbation: log(1 + sqrt(A/B)) / (m_omega b)."""
    if not (0 < A <= B):
        raise ValueError(f"need 0 < A <= B, got A={A}, B={B}")
    return math.log1p(math.sqrt(A / B)) / (m_omega * b)


def perturbed_bounds(A: float, B: float, m_omega: float, b: float, epsilon: float) -> FrameBounds:
    """Frame bounds after moving every point by at most epsilon."""
    if epsilon < 0:
        raise ValueError("epsilon must be nonnegative")
    e = m_omega * b * epsilon
    if e == 0:
        return FrameBounds(A, B, perturb_bound(A, B, m_omega, b) > 0)
    root = math.sqrt(A) - math.sqrt(B) * math.expm1(e)
    admissible = epsilon < perturb_bound(A, B, m_omega, b)
    return FrameBounds(root**2 if root > 0 else 0.0, B * math.exp(2 * e), admissible)
