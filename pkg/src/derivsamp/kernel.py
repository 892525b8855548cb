"""Reproducing kernel of B(Omega) and finite kernel expansions.

With the Fourier convention f^(w) = int f(x) e^{-i w.x} dx the kernel is

    Phi(x) = (2 pi)^{-d} int_Omega e^{i w.x} dw,

so Phi(x) = sin(Wx) / (pi x) for Omega = [-W, W]. A test function
f = sum_j c_j Phi(. - y_j) has ||f||^2 = c^T G c with G_ij = Phi(y_i - y_j).
"""
from __future__ import annotations

import math
from dataclasses import dataclass, field

import numpy as np

from .errors import CapabilityError, NumericalError

K_MAX = 10
# highest derivative order the 1D kernel routines accept (tail bounds need many)
MAX_ORDER = 96
_GRAM_NEG_TOL = 1e-10


@dataclass(frozen=True)
class Domain:
    """Symmetric frequency set: interval [-W, W], box [-W, W]^d or disc radius W."""

    kind: str
    width: float
    dim: int = 1

    def __post_init__(self):
        if self.kind not in ("interval", "box", "ball"):
            raise ValueError(f"unknown domain kind {self.kind!r}")
        if not self.width > 0:
            raise ValueError("width must be positive")
        if self.kind == "interval" and self.dim != 1:
            raise ValueError("interval domains are one-dimensional")

    @classmethod
    def interval(cls, W: float = 1.0) -> "Domain":
        return cls("interval", W, 1)

    @classmethod
    def box(cls, W: float = 1.0, d: int = 2) -> "Domain":
        return cls("box", W, d)

    @classmethod
    def ball(cls, rho: float = 1.0, d: int = 2) -> "Domain":
        return cls("ball", rho, d)

    @property
    def m_omega(self) -> float:
        """sup of the Euclidean norm over Omega."""
        if self.kind == "box":
            return self.width * math.sqrt(self.dim)
        return self.width

    @property
    def r(self) -> float:
        """Radius of the smallest enclosing ball (origin-centred here)."""
        return self.m_omega

    @property
    def bar_omega(self) -> np.ndarray:
        return np.full(self.dim, self.width)

    def describe(self) -> str:
        return f"{self.kind} W={self.width!r} d={self.dim}"

    @classmethod
    def parse(cls, text: str) -> "Domain":
        parts = text.split()
        opts = dict(p.split("=", 1) for p in parts[1:])
        return cls(parts[0], float(opts["W"]), int(opts.get("d", 1)))


def _alpha(alpha, dim: int) -> tuple[int, ...]:
    if isinstance(alpha, (int, np.integer)):
        alpha = (int(alpha),) if dim == 1 else (int(alpha),) + (0,) * (dim - 1)
    alpha = tuple(int(a) for a in alpha)
    if len(alpha) != dim or min(alpha) < 0:
        raise ValueError(f"bad multi-index {alpha} for dimension {dim}")
    return alpha


def _as_points(x, dim: int) -> np.ndarray:
    x = np.asarray(x, dtype=float)
    if dim == 1 and (x.ndim == 0 or x.shape[-1] != 1):
        x = x[..., None]
    if x.shape[-1] != dim:
        raise ValueError(f"points must have trailing dimension {dim}")
    return x


def _quadrature_cs(l: int, u: np.ndarray) -> tuple[np.ndarray, np.ndarray]:
    """Gauss-Legendre for int_0^1 t^l cos(tu) dt and int_0^1 t^l sin(tu) dt.

    Used for |u| < max(l, 2); the node count covers both t^l and the
    oscillation so the rule is accurate to rounding.
    """
    n = 2 * max(l, 2) + 24
    t, w = np.polynomial.legendre.leggauss(n)
    t = 0.5 * (t + 1)
    w = 0.5 * w * t**l
    arg = np.multiply.outer(u, t)
    return np.cos(arg) @ w, np.sin(arg) @ w


def _recurrence_cs(l: int, u: np.ndarray) -> tuple[np.ndarray, np.ndarray]:
    """Integration-by-parts recurrence, stable for |u| >= l."""
    su, cu = np.sin(u), np.cos(u)
    c = su / u
    s = (1 - cu) / u
    for j in range(1, l + 1):
        c, s = su / u - j * s / u, -cu / u + j * c / u
    return c, s


def _unit_deriv(l: int, u: np.ndarray) -> np.ndarray:
    """phi_l(u) = 1/2 int_{-1}^1 (it)^l e^{itu} dt, real-valued."""
    u = np.asarray(u, dtype=float)
    out = np.empty_like(u)
    small = np.abs(u) < max(l, 2)
    if small.any():
        c, s = _quadrature_cs(l, u[small])
        out[small] = _select(l, c, s)
    big = ~small
    if big.any():
        c, s = _recurrence_cs(l, u[big])
        out[big] = _select(l, c, s)
    return out


def _select(l: int, c, s):
    p = l // 2
    if l % 2 == 0:
        return (-1) ** p * c
    return (-1) ** (p + 1) * s


def interval_kernel_deriv(W: float, l: int, x) -> np.ndarray:
    """d^l/dx^l of sin(Wx)/(pi x)."""
    x = np.asarray(x, dtype=float)
    return W ** (l + 1) / math.pi * _unit_deriv(l, W * x)


def interval_kernel_derivs(W: float, pmax: int, x) -> np.ndarray:
    """All derivatives of sin(Wx)/(pi x) up to order pmax; shape (pmax+1, *x.shape)."""
    if pmax > MAX_ORDER:
        raise ValueError(f"order {pmax} exceeds supported maximum {MAX_ORDER}")
    x = np.asarray(x, dtype=float)
    u = (W * x).ravel()
    C = np.empty((pmax + 1, u.size))
    S = np.empty((pmax + 1, u.size))
    small = np.abs(u) < max(pmax, 2)
    if small.any():
        n = 2 * max(pmax, 2) + 24
        t, w = np.polynomial.legendre.leggauss(n)
        t = 0.5 * (t + 1)
        tw = 0.5 * w[:, None] * t[:, None] ** np.arange(pmax + 1)
        idx = np.flatnonzero(small)
        for chunk in np.array_split(idx, max(1, idx.size // 4096)):
            arg = np.multiply.outer(u[chunk], t)
            C[:, chunk] = (np.cos(arg) @ tw).T
            S[:, chunk] = (np.sin(arg) @ tw).T
    big = ~small
    if big.any():
        ub = u[big]
        su, cu = np.sin(ub), np.cos(ub)
        c = su / ub
        s = (1 - cu) / ub
        C[0, big], S[0, big] = c, s
        for j in range(1, pmax + 1):
            c, s = su / ub - j * s / ub, -cu / ub + j * c / ub
            C[j, big], S[j, big] = c, s
    out = np.empty_like(C)
    for l in range(pmax + 1):
        out[l] = W ** (l + 1) / math.pi * _select(l, C[l], S[l])
    return out.reshape((pmax + 1,) + x.shape)


def _disc_nodes(n: int):
    r, wr = np.polynomial.legendre.leggauss(n)
    r = 0.5 * (r + 1)
    wr = 0.5 * wr * r  # polar Jacobian
    theta = 2 * math.pi * np.arange(2 * n) / (2 * n)
    wt = np.full(2 * n, 2 * math.pi / (2 * n))
    return r, wr, theta, wt


def _ball_kernel_deriv(rho: float, alpha: tuple[int, int], x: np.ndarray) -> np.ndarray:
    # polar Gauss-Legendre x trapezoid rule; integrand is entire, so the
    # node count only has to resolve the oscillation rho*|x|
    scale = float(np.max(np.abs(x))) if x.size else 0.0
    n = 24 + int(math.ceil(rho * scale * 1.5)) + sum(alpha)
    r, wr, theta, wt = _disc_nodes(n)
    w1 = rho * np.outer(r, np.cos(theta)).ravel()
    w2 = rho * np.outer(r, np.sin(theta)).ravel()
    wts = np.outer(wr, wt).ravel() * rho**2
    mono = (1j * w1) ** alpha[0] * (1j * w2) ** alpha[1] * wts
    phase = np.exp(1j * (x[..., 0, None] * w1 + x[..., 1, None] * w2))
    return (phase @ mono).real / (2 * math.pi) ** 2


def kernel_deriv(domain: Domain, alpha, x) -> np.ndarray:
    """D^alpha Phi_Omega at x (shape (..., d), or (...) when d = 1)."""
    alpha = _alpha(alpha, domain.dim)
    if max(alpha) > MAX_ORDER:
        raise ValueError(f"derivative order {sum(alpha)} exceeds supported maximum")
    pts = _as_points(x, domain.dim)
    if domain.kind in ("interval", "box"):
        out = np.ones(pts.shape[:-1])
        for i, a in enumerate(alpha):
            out = out * interval_kernel_deriv(domain.width, a, pts[..., i])
        return out
    if domain.dim != 2:
        raise CapabilityError("ball kernels are implemented for d = 2 only")
    return _ball_kernel_deriv(domain.width, alpha, pts)


def kernel_eval(domain: Domain, x) -> np.ndarray:
    return kernel_deriv(domain, (0,) * domain.dim, x)


def multi_indices(dim: int, k: int) -> list[tuple[int, ...]]:
    """All alpha in N_0^dim with |alpha|_1 <= k, by degree then lexicographic."""
    out = []
    for deg in range(k + 1):
        out.extend(compositions(deg, dim))
    return out


def compositions(total: int, parts: int):
    """Multi-indices with exactly `parts` entries summing to `total`."""
    if parts == 1:
        yield (total,)
        return
    for first in range(total, -1, -1):
        for rest in compositions(total - first, parts - 1):
            yield (first,) + rest


@dataclass
class TestFunction:
    """f = sum_j c_j Phi_Omega(. - y_j)."""

    __test__ = False  # not a pytest class

    domain: Domain
    centers: np.ndarray
    coeffs: np.ndarray
    _gram: np.ndarray | None = field(default=None, repr=False, compare=False)

    def __post_init__(self):
        self.centers = _as_points(self.centers, self.domain.dim).reshape(-1, self.domain.dim)
        self.coeffs = np.asarray(self.coeffs, dtype=float).ravel()
        if len(self.coeffs) != len(self.centers):
            raise ValueError("one coefficient per center required")

    @property
    def J(self) -> int:
        return len(self.coeffs)

    def derivative(self, alpha, x) -> np.ndarray:
        """D^alpha f at points x."""
        pts = _as_points(x, self.domain.dim)
        diff = pts[..., None, :] - self.centers
        return kernel_deriv(self.domain, alpha, diff) @ self.coeffs

    def __call__(self, x) -> np.ndarray:
        return self.derivative((0,) * self.domain.dim, x)

    def gram(self) -> np.ndarray:
        if self._gram is None:
            diff = self.centers[:, None, :] - self.centers[None, :, :]
            self._gram = kernel_eval(self.domain, diff)
        return self._gram


def _quadratic_form(G: np.ndarray, c: np.ndarray) -> float:
    q = float(c @ G @ c)
    scale = float(np.abs(c) @ np.abs(G) @ np.abs(c)) or 1.0
    if q < 0:
        if q < -_GRAM_NEG_TOL * max(scale, 1.0):
            raise NumericalError(f"indefinite Gram quadratic form {q:.3e}")
        return 0.0
    return q


def norm_squared(f: TestFunction) -> float:
    return _quadratic_form(f.gram(), f.coeffs)


def deriv_norm_squared(f: TestFunction, alpha) -> float:
    """||D^alpha f||^2 via (-1)^{|alpha|} D^{2 alpha} Phi at center differences."""
    alpha = _alpha(alpha, f.domain.dim)
    double = tuple(2 * a for a in alpha)
    diff = f.centers[:, None, :] - f.centers[None, :, :]
    G = (-1) ** sum(alpha) * kernel_deriv(f.domain, double, diff)
    return _quadratic_form(G, f.coeffs)


def eval_derivatives_at(f: TestFunction, x, k: int) -> dict[tuple[int, ...], np.ndarray]:
    """D^alpha f(x) for every |alpha|_1 <= k."""
    return {a: f.derivative(a, x) for a in multi_indices(f.domain.dim, k)}


def random_test_function(
    domain: Domain,
    J: int,
    center_window: float,
    coeff_scale: float = 1.0,
    seed=0,
) -> TestFunction:
    """Centers uniform in [-center_window, center_window]^d, N(0, scale^2) coefficients."""
    if J < 1:
        raise ValueError("J must be >= 1")
    rng = np.random.default_rng(seed)
    centers = rng.uniform(-center_window, center_window, size=(J, domain.dim))
    coeffs = coeff_scale * rng.standard_normal(J)
    return TestFunction(domain, centers, coeffs)
