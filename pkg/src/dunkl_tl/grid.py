"""Truncated G-invariant grids with midpoint quadrature against d(omega)."""

from __future__ import annotations

from dataclasses import dataclass, field

import numpy as np

from .reflection import DunklStructure, weight

DEFAULT_POINTS = {1: 512, 2: 32}


class GridMismatch(ValueError):
    pass


@dataclass(frozen=True)
class GridSpec:
    L: float = 8.0
    m: int | None = None
    n: int = 1

    def __post_init__(self):
        if self.m is None:
            object.__setattr__(self, "m", DEFAULT_POINTS.get(self.n, 16))
        if self.L <= 0:
            raise ValueError("box half width L must be positive")
        if self.m <= 0 or self.m % 2:
            raise ValueError(f"points per axis must be a positive even integer, got {self.m}")

    @property
    def delta(self) -> float:
        return 2.0 * self.L / self.m


@dataclass(frozen=True, eq=False)
class WeightedGrid:
    """Offset tensor grid x_i = -L + (i + 1/2) delta, row-major point order."""

    spec: GridSpec
    axis: np.ndarray
    points: np.ndarray  # (npoints, n)
    masses: np.ndarray  # w(x_i) delta^n
    structure: DunklStructure = field(repr=False)

    @property
    def size(self) -> int:
        return self.points.shape[0]

    @property
    def delta(self) -> float:
        return self.spec.delta

    @property
    def shape(self) -> tuple[int, ...]:
        return (self.spec.m,) * self.spec.n

    def index_of(self, pts: np.ndarray, tol: float = 1e-9) -> np.ndarray:
        """Row-major indices of grid points; -1 where a point is off the grid."""
        pts = np.atleast_2d(np.asarray(pts, dtype=float))
        raw = (pts + self.spec.L) / self.delta - 0.5
        ij = np.rint(raw).astype(np.int64)
        ok = np.all(np.abs(raw - ij) * self.delta <= tol, axis=1)
        ok &= np.all((ij >= 0) & (ij < self.spec.m), axis=1)
        flat = np.ravel_multi_index(tuple(np.clip(ij, 0, self.spec.m - 1).T), self.shape)
        return np.where(ok, flat, -1)

    def permutation(self, g: np.ndarray) -> np.ndarray:
        """Index array ``perm`` with points[perm[i]] = g(points[i])."""
        perm = self.index_of(self.points @ np.asarray(g).T)
        if np.any(perm < 0):
            raise GridMismatch("grid is not closed under the group element")
        return perm

    def inner(self, f: np.ndarray, g: np.ndarray) -> float:
        return float(np.sum(f * np.conj(g) * self.masses).real)

    def norm(self, f: np.ndarray) -> float:
        return lp_norm(f, 2.0, self)

    def inner_half_box(self) -> np.ndarray:
        return np.all(np.abs(self.points) <= 0.5 * self.spec.L, axis=1)


def build_grid(spec: GridSpec, s: DunklStructure) -> WeightedGrid:
    if spec.n != s.dimension:
        raise ValueError(f"grid dimension {spec.n} != root system dimension {s.dimension}")
    axis = -spec.L + (np.arange(spec.m) + 0.5) * spec.delta
    mesh = np.meshgrid(*([axis] * spec.n), indexing="ij")
    points = np.stack([c.ravel() for c in mesh], axis=1)
    if s.roots.rank:
        proj = points @ s.roots.roots.T
        on_plane = np.abs(proj) <= 1e-12 * spec.L
        if np.any(on_plane):
            i = int(np.flatnonzero(on_plane.any(axis=1))[0])
            raise GridMismatch(f"grid point {points[i]} lies on a reflection hyperplane")
    masses = weight(points, s) * spec.delta ** spec.n
    grid = WeightedGrid(spec=spec, axis=axis, points=points, masses=masses, structure=s)
    for g in s.group.elements:
        grid.permutation(g)
    return grid


def integrate(f: np.ndarray, grid: WeightedGrid) -> float:
    """Midpoint quadrature of f against d(omega)."""
    f = np.asarray(f)
    if f.shape != (grid.size,):
        raise GridMismatch(f"function has shape {f.shape}, grid has {grid.size} points")
    return float(np.sum(f * grid.masses))


def lp_norm(f: np.ndarray, p: float, grid: WeightedGrid) -> float:
    if p <= 0:
        raise ValueError("p must be positive")
    if np.isinf(p):
        return float(np.max(np.abs(f)))
    return integrate(np.abs(f) ** p, grid) ** (1.0 / p)


def _rng(seed: int) -> np.random.Generator:
    return np.random.Generator(np.random.Philox(np.random.SeedSequence(seed)))


def random_bumps(grid: WeightedGrid, seed: int, count: int = 12, spread: float | None = None):
    """Seeded superposition of Gaussian bumps; independent of the resolution."""
    rng = _rng(seed)
    spread = 0.5 * grid.spec.L if spread is None else spread
    n = grid.spec.n
    centers = rng.uniform(-spread, spread, size=(count, n))
    widths = np.exp(rng.uniform(np.log(0.1), np.log(1.0), size=count))
    amps = rng.standard_normal(count)
    d2 = np.sum((grid.points[:, None, :] - centers[None]) ** 2, axis=-1)
    return np.exp(-d2 / (2 * widths**2)) @ amps


def make_test_function(kind: str, seed: int, grid: WeightedGrid, **params) -> np.ndarray:
    """Deterministic test functions.

    kinds: ``gaussian`` (center, width), ``bump`` (center, radius),
    ``random`` (white noise), ``bandlimited`` (window, family, source).
    ``bandlimited`` applies the sum of D_k over ``window = (a, b)`` to a
    seeded random g; ``family`` must be a SemigroupFamily and ``source``
    selects g as ``"bumps"`` (default) or ``"noise"``.
    """
    x = grid.points
    if kind == "gaussian":
        c = np.asarray(params.get("center", 0.0), dtype=float)
        width = params.get("width", 1.0)
        return np.exp(-np.sum((x - c) ** 2, axis=1) / width**2)
    if kind == "bump":
        c = np.asarray(params.get("center", 0.0), dtype=float)
        radius = params.get("radius", 1.0)
        r2 = np.sum((x - c) ** 2, axis=1) / radius**2
        out = np.zeros(grid.size)
        inside = r2 < 1
        out[inside] = np.exp(-1.0 / (1.0 - r2[inside]))
        return out
    if kind == "random":
        return _rng(seed).standard_normal(grid.size)
    if kind == "bandlimited":
        try:
            a, b = params["window"]
            family = params["family"]
        except KeyError:
            raise ValueError("bandlimited test functions need window=(a, b) and family=")
        source = params.get("source", "bumps")
        if source == "bumps":
            g = random_bumps(grid, seed)
        elif source == "noise":
            g = _rng(seed).standard_normal(grid.size)
        else:
            raise ValueError(f"unknown source {source!r}")
        return family.dk_sum(a, b)(g)
    raise ValueError(f"unknown test function kind {kind!r}")
