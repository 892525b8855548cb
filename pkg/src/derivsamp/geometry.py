"""Sampling sets, densities and Voronoi moment weights.

Finite sets live in a window (an interval in 1D, a box in d dimensions) and
their Voronoi cells are clipped to it. Reflecting the set across the window
faces gives a bi-infinite set with the same density whose cells inside the
window are exactly these clipped cells; the frame harness relies on this to
treat a finite sum as a truncation of an infinite one.
"""
from __future__ import annotations

import math
from dataclasses import dataclass, field

import numpy as np
from scipy.spatial import cKDTree

from .errors import BoundViolation
from .kernel import multi_indices

_CHUNK = 1 << 18


@dataclass
class WeightTable:
    """mu[n, i] is the weight of point n for multi-index alphas[i]."""

    values: np.ndarray
    alphas: list[tuple[int, ...]]
    coarse: bool = False

    def column(self, alpha) -> np.ndarray:
        return self.values[:, self.alphas.index(tuple(alpha))]


# ---------------------------------------------------------------- 1D


@dataclass
class SamplingSet1D:
    points: np.ndarray
    lo: float
    hi: float

    def __post_init__(self):
        self.points = np.asarray(self.points, dtype=float).ravel()
        if len(self.points) == 0:
            raise ValueError("empty sampling set")
        if np.any(np.diff(self.points) <= 0):
            raise ValueError("points must be strictly increasing")
        if not (self.lo <= self.points[0] and self.points[-1] <= self.hi):
            raise ValueError("points must lie in the window")

    def __len__(self):
        return len(self.points)

    @property
    def breakpoints(self) -> np.ndarray:
        """z_0 = lo, z_n = (x_{n-1} + x_n)/2, z_N = hi."""
        mids = 0.5 * (self.points[1:] + self.points[:-1])
        return np.concatenate([[self.lo], mids, [self.hi]])

    @property
    def cell_lengths(self) -> np.ndarray:
        return np.diff(self.breakpoints)

    def scaled(self, c: float) -> "SamplingSet1D":
        return SamplingSet1D(c * self.points, c * self.lo, c * self.hi)


def density_1d(ss: SamplingSet1D) -> float:
    """Largest distance from a window point to the nearest sample."""
    if len(ss) < 1:
        raise ValueError("empty sampling set")
    half_gaps = 0.5 * np.diff(ss.points)
    edges = [ss.points[0] - ss.lo, ss.hi - ss.points[-1]]
    return float(max(edges + ([half_gaps.max()] if len(half_gaps) else [])))


def uniform_set(spacing: float, half_count: int, offset: float = 0.0) -> SamplingSet1D:
    """x_n = offset + n*spacing, |n| <= half_count, window +-(half_count + 1/2)*spacing."""
    n = np.arange(-half_count, half_count + 1)
    edge = (half_count + 0.5) * spacing
    return SamplingSet1D(offset + n * spacing, offset - edge, offset + edge)


def jittered_set(spacing: float, jitter: float, half_width: float, seed=0) -> SamplingSet1D:
    """Points n*spacing + U(-jitter, jitter) for the n that fit in [-half_width, half_width].

    The window is trimmed to +-(N + 1/2)*spacing with N = floor(half_width/spacing - 1/2),
    so that the boundary cells look like interior ones.
    """
    if not spacing > 0:
        raise ValueError("spacing must be positive")
    if not 0 <= jitter < spacing / 2:
        raise BoundViolation(f"jitter {jitter} must be in [0, spacing/2) to keep the ordering")
    N = int(math.floor(half_width / spacing - 0.5))
    if N < 0:
        raise ValueError("window too small for one point")
    rng = np.random.default_rng(seed)
    n = np.arange(-N, N + 1)
    pts = n * spacing + rng.uniform(-jitter, jitter, size=len(n))
    edge = (N + 0.5) * spacing
    return SamplingSet1D(pts, -edge, edge)


def weights_1d(ss: SamplingSet1D, k: int) -> WeightTable:
    """mu_{n,l} = (1/l!) int_{V_n} (x - x_n)^{2l} dx, in closed form."""
    z = ss.breakpoints
    right = z[1:] - ss.points
    left = z[:-1] - ss.points
    vals = np.empty((len(ss), k + 1))
    for l in range(k + 1):
        p = 2 * l + 1
        vals[:, l] = (right**p - left**p) / (math.factorial(l) * p)
    return WeightTable(vals, [(l,) for l in range(k + 1)])


# ---------------------------------------------------------------- d dimensions


@dataclass
class SamplingSetND:
    points: np.ndarray
    lo: np.ndarray
    hi: np.ndarray
    q: float = 2.0
    resolution: int = 256
    _assign: np.ndarray | None = field(default=None, repr=False, compare=False)

    def __post_init__(self):
        self.points = np.atleast_2d(np.asarray(self.points, dtype=float))
        d = self.points.shape[1]
        self.lo = np.broadcast_to(np.asarray(self.lo, dtype=float), (d,)).copy()
        self.hi = np.broadcast_to(np.asarray(self.hi, dtype=float), (d,)).copy()
        if np.any(self.hi <= self.lo):
            raise ValueError("empty window")
        if not (self.q >= 1):
            raise ValueError("q must be in [1, inf]")
        if np.any(self.points < self.lo) or np.any(self.points > self.hi):
            raise ValueError("points must lie in the window")
        if len(np.unique(self.points, axis=0)) != len(self.points):
            raise ValueError("points must be pairwise distinct")

    @property
    def dim(self) -> int:
        return self.points.shape[1]

    def __len__(self):
        return len(self.points)

    @property
    def cell_size(self) -> np.ndarray:
        return (self.hi - self.lo) / self.resolution

    def _axes(self):
        h = self.cell_size
        return [self.lo[i] + h[i] * (np.arange(self.resolution) + 0.5) for i in range(self.dim)]

    def grid_chunks(self):
        """Yield (flat start index, midpoints) over the grid in C order."""
        axes = self._axes()
        total = self.resolution**self.dim
        for start in range(0, total, _CHUNK):
            idx = np.arange(start, min(start + _CHUNK, total))
            sub = np.unravel_index(idx, (self.resolution,) * self.dim)
            yield start, np.stack([axes[i][sub[i]] for i in range(self.dim)], axis=-1)

    def _nearest(self, x: np.ndarray, tree: cKDTree):
        """Nearest point, lowest index on ties."""
        k = 2 if len(self) > 1 else 1
        dist, idx = tree.query(x, k=k, p=self.q)
        if k == 1:
            return dist, idx
        tie = np.isclose(dist[:, 0], dist[:, 1], rtol=1e-12, atol=0.0)
        best = np.where(tie, np.minimum(idx[:, 0], idx[:, 1]), idx[:, 0])
        return dist[:, 0], best

    def assignment(self) -> np.ndarray:
        """Owner of every grid cell (flat, C order)."""
        if self._assign is None:
            tree = cKDTree(self.points)
            out = np.empty(self.resolution**self.dim, dtype=np.intp)
            for start, x in self.grid_chunks():
                out[start : start + len(x)] = self._nearest(x, tree)[1]
            self._assign = out
        return self._assign

    def scaled(self, c: float) -> "SamplingSetND":
        return SamplingSetND(c * self.points, c * self.lo, c * self.hi, self.q, self.resolution)


def _qnorm(v: np.ndarray, q: float) -> float:
    return float(np.linalg.norm(v, ord=q))


def density_nd(ss: SamplingSetND) -> tuple[float, float]:
    """(delta on grid midpoints, uncertainty = half grid diagonal in the q-norm)."""
    tree = cKDTree(ss.points)
    best = 0.0
    for _, x in ss.grid_chunks():
        best = max(best, float(ss._nearest(x, tree)[0].max()))
    return best, _qnorm(ss.cell_size / 2, ss.q)


def weights_nd(ss: SamplingSetND, k: int) -> WeightTable:
    """Midpoint-rule Voronoi moments (1/alpha!) int_{V_n} (x - x_n)^{2 alpha} dx."""
    alphas = multi_indices(ss.dim, k)
    owner = ss.assignment()
    vol = float(np.prod(ss.cell_size))
    vals = np.zeros((len(ss), len(alphas)))
    lo_idx = np.full((len(ss), ss.dim), ss.resolution)
    hi_idx = np.full((len(ss), ss.dim), -1)
    fact = np.array([math.prod(math.factorial(a) for a in al) for al in alphas])
    for start, x in ss.grid_chunks():
        own = owner[start : start + len(x)]
        diff = x - ss.points[own]
        for i, al in enumerate(alphas):
            w = np.prod(diff ** (2 * np.asarray(al)), axis=1)
            vals[:, i] += np.bincount(own, weights=w, minlength=len(ss))
        sub = np.stack(np.unravel_index(np.arange(start, start + len(x)), (ss.resolution,) * ss.dim), -1)
        for ax in range(ss.dim):
            np.minimum.at(lo_idx[:, ax], own, sub[:, ax])
            np.maximum.at(hi_idx[:, ax], own, sub[:, ax])
    vals *= vol / fact
    extent = hi_idx - lo_idx + 1
    coarse = bool(np.any(extent < 4))
    return WeightTable(vals, alphas, coarse)


def jittered_grid_nd(
    spacing: float,
    jitter: float,
    half_count: int,
    d: int = 2,
    q: float = 2.0,
    resolution: int | None = None,
    seed=0,
    cells_per_spacing: int = 8,
) -> SamplingSetND:
    """Tensor grid n*spacing with per-coordinate U(-jitter, jitter) displacement."""
    if not 0 <= jitter < spacing / 2:
        raise BoundViolation("jitter must be in [0, spacing/2)")
    rng = np.random.default_rng(seed)
    n = np.arange(-half_count, half_count + 1) * spacing
    mesh = np.stack(np.meshgrid(*([n] * d), indexing="ij"), -1).reshape(-1, d)
    pts = mesh + rng.uniform(-jitter, jitter, size=mesh.shape)
    edge = (half_count + 0.5) * spacing
    if resolution is None:
        resolution = (2 * half_count + 1) * cells_per_spacing
    return SamplingSetND(pts, -edge, edge, q, resolution)


# ---------------------------------------------------------------- bunched sets


@dataclass
class BunchedSet:
    """Centers x_{n,0} with s offsets each; bunch n is centers[n] + [0, *offsets[n]]."""

    centers: SamplingSet1D
    offsets: np.ndarray
    tau: float

    def __post_init__(self):
        self.offsets = np.asarray(self.offsets, dtype=float).reshape(len(self.centers), -1)
        if not 0 < self.tau <= 1:
            raise ValueError("tau must be in (0, 1]")
        full = np.concatenate([np.zeros((len(self.centers), 1)), self.offsets], axis=1)
        srt = np.sort(full, axis=1)
        if np.any(np.diff(srt, axis=1) <= 0):
            raise ValueError("coincident points within a bunch")
        h = self.h
        if np.any(np.abs(self.offsets) > h * (1 + 1e-12)):
            raise BoundViolation("an offset exceeds the bunch width tau*delta")
        z = self.centers.breakpoints
        x = self.centers.points
        room = np.minimum(x - z[:-1], z[1:] - x)
        if np.any(np.abs(self.offsets).max(axis=1, initial=0.0) > room * (1 + 1e-12)):
            raise BoundViolation("a bunch leaves the Voronoi cell of its center")

    @property
    def s(self) -> int:
        return self.offsets.shape[1]

    @property
    def delta(self) -> float:
        return density_1d(self.centers)

    @property
    def h(self) -> float:
        return self.tau * self.delta

    def bunch(self, n: int) -> np.ndarray:
        return self.centers.points[n] + np.concatenate([[0.0], self.offsets[n]])

    def all_points(self) -> np.ndarray:
        """(N, s+1) array of x_{n,m}."""
        return self.centers.points[:, None] + np.concatenate(
            [np.zeros((len(self.centers), 1)), self.offsets], axis=1
        )


def _equispaced_offsets(s: int) -> np.ndarray:
    """Alternating +-, growing: unit-width pattern with distinct entries."""
    i = np.arange(1, s + 1)
    sign = np.where(i % 2 == 1, 1.0, -1.0)
    return sign * np.ceil(i / 2) / math.ceil(s / 2) if s else np.zeros(0)


def bunched_set(
    centers: SamplingSet1D,
    s: int,
    tau: float,
    mode: str = "equispaced",
    adapt_width: bool = False,
    seed=0,
) -> BunchedSet:
    """Attach s offsets of width h_n <= tau*delta to every center.

    With ``adapt_width`` each bunch uses h_n = min(tau*delta, room to its cell
    edges); otherwise h_n = tau*delta everywhere and a bunch that leaves its
    Voronoi cell raises :class:`BoundViolation`.
    """
    if s < 0:
        raise ValueError("s must be >= 0")
    h = tau * density_1d(centers)
    x = centers.points
    z = centers.breakpoints
    room = np.minimum(x - z[:-1], z[1:] - x)
    hn = np.minimum(h, room) if adapt_width else np.full(len(x), h)
    if mode == "equispaced":
        offs = hn[:, None] * _equispaced_offsets(s)[None, :]
    elif mode == "random":
        rng = np.random.default_rng(seed)
        offs = hn[:, None] * rng.uniform(-1, 1, size=(len(x), s))
    else:
        raise ValueError(f"unknown offset mode {mode!r}")
    return BunchedSet(centers, offs, tau)


def bunched_weights(bs: BunchedSet) -> WeightTable:
    """mu_{n,m} = m! int_{V_n} N_{n,m}(x)^2 dx by Gauss-Legendre with s+1 nodes."""
    s = bs.s
    t, w = np.polynomial.legendre.leggauss(s + 1)
    z = bs.centers.breakpoints
    a, b = z[:-1], z[1:]
    x = 0.5 * (b - a)[:, None] * (t + 1) + a[:, None]  # (N, s+1) nodes
    wx = 0.5 * (b - a)[:, None] * w
    pts = bs.all_points()
    vals = np.empty((len(bs.centers), s + 1))
    N = np.ones_like(x)
    for m in range(s + 1):
        vals[:, m] = math.factorial(m) * np.sum(wx * N**2, axis=1)
        if m < s:
            N = N * (x - pts[:, m : m + 1])
    return WeightTable(vals, [(m,) for m in range(s + 1)])
