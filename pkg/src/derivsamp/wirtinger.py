"""Optimal higher-order Wirtinger constants.

c_k is the smallest constant with

    int_a^b |f|^2 <= (c_k (b - a))^{2k} int_a^b |f^(k)|^2

for f vanishing to order k at one endpoint. Equivalently 1/c_k is the first
positive root tau of the boundary-condition determinant of
(-1)^k g^(2k) = tau^{2k} g on [0, 1] with g, ..., g^(k-1) zero at 0 and
g^(k), ..., g^(2k-1) zero at 1.

Two independent routes are provided: :func:`det_first_root` (root of the
determinant) and :func:`collocation_oracle` (Galerkin discretisation of the
k-fold integration operator, whose norm is c_k^k).
"""
from __future__ import annotations

import math
from dataclasses import dataclass
from functools import lru_cache

import numpy as np

from .errors import NumericalError

SCAN_START = 0.05
SCAN_STEP = 1e-3
SMIN_THRESHOLD = 1e-2


@dataclass(frozen=True)
class WirtingerResult:
    k: int
    tau_1: float
    residual: float

    @property
    def c_k(self) -> float:
        return 1.0 / self.tau_1


def _exponents(k: int, tau) -> np.ndarray:
    # i z^s tau, s = 0..2k-1, z = exp(i pi / k)
    z = np.exp(1j * np.pi / k)
    return 1j * z ** np.arange(2 * k) * np.asarray(tau)[..., None]


def build_matrix(k: int, tau):
    """Boundary-condition matrix A(tau), shape (2k, 2k) (or batched over tau).

    Rows 0..k-1:   (i z^s tau)^r
    Rows k..2k-1:  (i z^s tau)^(k+r) exp(i z^s tau)
    For k = 1 the analytic root pi/2 is known and the matrix is not needed;
    it is still assembled if requested.
    """
    if k < 1:
        raise ValueError("k must be >= 1")
    lam = _exponents(k, tau)  # (..., 2k)
    r = np.arange(k)[:, None]
    top = lam[..., None, :] ** r
    bottom = lam[..., None, :] ** (k + r) * np.exp(lam)[..., None, :]
    return np.concatenate([top, bottom], axis=-2)


def _normalised(A: np.ndarray) -> np.ndarray:
    return A / np.linalg.norm(A, axis=-1, keepdims=True)


def smallest_singular_ratio(k: int, tau) -> np.ndarray:
    """sigma_min / sigma_max of the row-normalised matrix."""
    s = np.linalg.svd(_normalised(build_matrix(k, tau)), compute_uv=False)
    return s[..., -1] / s[..., 0]


def _det_phase(k: int, tau: float) -> complex:
    sign, _ = np.linalg.slogdet(_normalised(build_matrix(k, tau)))
    return complex(sign)


def det_first_root(k: int, tol: float = 1e-10) -> WirtingerResult:
    """First positive root of det A(tau), i.e. 1/c_k."""
    if not 1 <= k <= 12:
        raise ValueError("k must be in 1..12")
    if k == 1:
        return WirtingerResult(1, math.pi / 2, 0.0)
    hi_end = 2.0 + 2.0 * k
    taus = np.arange(SCAN_START, hi_end + SCAN_STEP / 2, SCAN_STEP)
    smin = np.concatenate(
        [smallest_singular_ratio(k, chunk) for chunk in np.array_split(taus, max(1, len(taus) // 2000))]
    )
    is_min = (smin[1:-1] < smin[:-2]) & (smin[1:-1] <= smin[2:]) & (smin[1:-1] < SMIN_THRESHOLD)
    for i in np.flatnonzero(is_min) + 1:
        a, b = taus[i - 1], taus[i + 1]
        # the determinant has constant phase up to sign: project onto it
        ref = _det_phase(k, a)
        fa = 1.0
        fb = (_det_phase(k, b) * ref.conjugate()).real
        if fb > 0:
            continue
        while b - a > tol:
            mid = 0.5 * (a + b)
            fm = (_det_phase(k, mid) * ref.conjugate()).real
            if fm * fa > 0:
                a = mid
            else:
                b = mid
        root = 0.5 * (a + b)
        return WirtingerResult(k, root, float(smallest_singular_ratio(k, root)))
    raise NumericalError(f"no determinant root found for k={k} in ({SCAN_START}, {hi_end}]")


@lru_cache(maxsize=None)
def wirtinger_constant(k: int) -> float:
    """c_k, cached."""
    return det_first_root(k).c_k


def _integration_operator(k: int, n: int) -> np.ndarray:
    """Galerkin matrix of f -> int_0^x (x-t)^{k-1}/(k-1)! f(t) dt on n cells.

    Basis: L2-normalised indicators of the cells of a uniform mesh on [0, 1].
    Entries follow from the second antiderivative u_+^{k+1}/(k+1)! of the
    kernel, so they are exact.
    """
    p = np.arange(n, dtype=float)

    def F(u):
        return np.where(u > 0, u, 0.0) ** (k + 1) / math.factorial(k + 1)

    band = F(p + 1) - 2 * F(p) + F(p - 1)
    i, j = np.tril_indices(n)
    M = np.zeros((n, n))
    M[i, j] = band[i - j]
    return M * (1.0 / n) ** k


def collocation_oracle(k: int, n_points: int = 400) -> float:
    """Independent estimate of c_k from the discretised variational problem.

    The smallest eigenvalue of the polyharmonic problem is
    1 / ||V^k||^2 where V^k is k-fold integration from 0 (which builds in
    the conditions at 0; those at 1 are natural). Returns the estimate
    of c_k = ||V^k||^{1/k}.
    """
    if n_points < 200:
        raise ValueError("n_points must be >= 200")
    if not 1 <= k <= 6:
        raise ValueError("oracle supports k in 1..6")
    M = _integration_operator(k, n_points)
    sigma = np.linalg.norm(M, 2)
    if not np.isfinite(sigma) or sigma <= 0:
        raise NumericalError("degenerate discretisation")
    return float(sigma ** (1.0 / k))


def oracle_eigenvalue(k: int, n_points: int = 400) -> float:
    """lambda_1^(k) estimated by the oracle (c_k^{-2k})."""
    return collocation_oracle(k, n_points) ** (-2 * k)


def slope_regression(k_min: int = 1, k_max: int = 10) -> tuple[float, float]:
    """Least-squares line 1/c_k ~ intercept + slope * k over k_min..k_max."""
    if k_max < k_min + 4:
        raise ValueError("need at least five points")
    ks = np.arange(k_min, k_max + 1)
    inv = np.array([1.0 / wirtinger_constant(int(k)) for k in ks])
    slope, intercept = np.polyfit(ks, inv, 1)
    return float(intercept), float(slope)
