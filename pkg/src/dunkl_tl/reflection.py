"""Root systems, finite reflection groups and the Dunkl weight."""

from __future__ import annotations

from collections import deque
from dataclasses import dataclass, field
from typing import TYPE_CHECKING, Sequence

import numpy as np

if TYPE_CHECKING:
    from .grid import WeightedGrid

NORM_TOL = 1e-12
MATCH_TOL = 1e-10
ORTHO_TOL = 1e-12
DEFAULT_GROUP_CAP = 1024


class RootSystemError(ValueError):
    pass


def reflect(alpha: np.ndarray, x: np.ndarray) -> np.ndarray:
    """Reflection of ``x`` across the hyperplane orthogonal to ``alpha``."""
    alpha = np.asarray(alpha, dtype=float)
    x = np.asarray(x, dtype=float)
    return x - 2.0 * (x @ alpha)[..., None] / (alpha @ alpha) * alpha


def reflection_matrix(alpha: np.ndarray) -> np.ndarray:
    alpha = np.asarray(alpha, dtype=float)
    n = alpha.shape[0]
    return np.eye(n) - 2.0 * np.outer(alpha, alpha) / (alpha @ alpha)


def _index_of(points: np.ndarray, p: np.ndarray, tol: float = MATCH_TOL) -> int:
    d = np.max(np.abs(points - p), axis=1)
    j = int(np.argmin(d))
    return j if d[j] <= tol else -1


@dataclass(frozen=True, eq=False)
class RootSystem:
    """A normalized root system with a G-invariant multiplicity.

    Roots are rows of ``roots``; ``kappa[i]`` is the multiplicity of
    ``roots[i]``. The full system is stored, both alpha and -alpha.
    """

    roots: np.ndarray
    kappa: np.ndarray
    dimension: int

    def __post_init__(self):
        raw = np.asarray(self.roots, dtype=float)
        if raw.ndim == 2 and raw.shape[0] and raw.shape[1] != self.dimension:
            raise RootSystemError(
                f"dimension mismatch: roots have {raw.shape[1]} coordinates, dimension is {self.dimension}"
            )
        roots = raw.reshape(-1, self.dimension)
        kappa = np.asarray(self.kappa, dtype=float).reshape(-1)
        object.__setattr__(self, "roots", roots)
        object.__setattr__(self, "kappa", kappa)
        if self.dimension < 1:
            raise RootSystemError("dimension must be positive")
        if kappa.shape[0] != roots.shape[0]:
            raise RootSystemError(
                f"{roots.shape[0]} roots but {kappa.shape[0]} multiplicities"
            )
        if np.any(kappa < 0):
            raise RootSystemError("multiplicities must be nonnegative")
        if roots.shape[0] == 0:
            return
        norms = np.einsum("ij,ij->i", roots, roots)
        bad = np.flatnonzero(np.abs(norms - 2.0) > NORM_TOL)
        if bad.size:
            raise RootSystemError(
                f"root {bad[0]} has <a,a> = {norms[bad[0]]!r}, expected 2"
            )
        # closure and invariance of kappa under every reflection
        for b in roots:
            images = reflect(b, roots)
            for i, img in enumerate(images):
                j = _index_of(roots, img)
                if j < 0:
                    raise RootSystemError(
                        f"reflection in {b} maps root {roots[i]} outside the system"
                    )
                if abs(kappa[j] - kappa[i]) > MATCH_TOL:
                    raise RootSystemError("kappa is not invariant under the group")

    @property
    def rank(self) -> int:
        return self.roots.shape[0]


@dataclass(frozen=True, eq=False)
class ReflectionGroup:
    elements: np.ndarray  # (order, n, n)
    generators: np.ndarray  # (g, n, n)
    dimension: int

    @property
    def order(self) -> int:
        return self.elements.shape[0]

    def act(self, x: np.ndarray) -> np.ndarray:
        """Orbit of ``x``: array of shape (order, ..., n)."""
        x = np.asarray(x, dtype=float)
        return np.einsum("gij,...j->g...i", self.elements, x)


def _canonical_key(g: np.ndarray) -> tuple:
    return tuple(np.round(g.ravel() / MATCH_TOL).astype(np.int64).tolist())


def generate_group(
    roots: RootSystem, cap: int = DEFAULT_GROUP_CAP
) -> ReflectionGroup:
    """Close the reflections of ``roots`` under composition (breadth first).

    Elements are sorted lexicographically on their flattened entries.
    Raises ``RootSystemError`` when the closure exceeds ``cap`` elements,
    which signals that the input is not a finite root system.
    """
    n = roots.dimension
    gens = [reflection_matrix(a) for a in roots.roots]
    unique_gens = {}
    for g in gens:
        unique_gens.setdefault(_canonical_key(g), g)
    gens = list(unique_gens.values())

    ident = np.eye(n)
    seen = {_canonical_key(ident): ident}
    queue = deque([ident])
    while queue:
        h = queue.popleft()
        for g in gens:
            e = g @ h
            key = _canonical_key(e)
            if key not in seen:
                seen[key] = e
                if len(seen) > cap:
                    raise RootSystemError(
                        f"group closure exceeds {cap} elements; not a root system?"
                    )
                queue.append(e)

    elements = sorted(seen.values(), key=lambda e: tuple(np.round(e.ravel(), 10)))
    elements = np.array(elements).reshape(-1, n, n)
    gen_arr = np.array(gens).reshape(-1, n, n)
    return ReflectionGroup(elements=elements, generators=gen_arr, dimension=n)


@dataclass(frozen=True, eq=False)
class DunklStructure:
    """Root system, its reflection group and the homogeneous dimension."""

    roots: RootSystem
    group: ReflectionGroup = field(default=None)

    def __post_init__(self):
        if self.group is None:
            object.__setattr__(self, "group", generate_group(self.roots))

    @property
    def dimension(self) -> int:
        return self.roots.dimension

    @property
    def homogeneous_dimension(self) -> float:
        return homogeneous_dimension(self)

    def weight(self, x: np.ndarray) -> np.ndarray:
        return weight(x, self)


def homogeneous_dimension(s: DunklStructure) -> float:
    """N = n + sum of kappa over the full root system."""
    return float(s.roots.dimension + np.sum(s.roots.kappa))


def weight(x: np.ndarray, s: DunklStructure) -> np.ndarray:
    """Dunkl weight prod_alpha |<alpha, x>|^kappa(alpha); vectorized over leading axes."""
    x = np.asarray(x, dtype=float)
    active = s.roots.kappa > 0
    out = np.ones(x.shape[:-1])
    if not np.any(active):
        return out
    proj = np.abs(x @ s.roots.roots[active].T)
    return np.prod(proj ** s.roots.kappa[active], axis=-1)


def dunkl_metric(x: np.ndarray, y: np.ndarray, g: ReflectionGroup) -> float:
    """Orbit distance min over sigma in G of |x - sigma(y)|."""
    x = np.atleast_1d(np.asarray(x, dtype=float))
    y = np.atleast_1d(np.asarray(y, dtype=float))
    if x.shape != y.shape or x.shape[-1] != g.dimension:
        raise ValueError(f"dimension mismatch: {x.shape} vs {y.shape}")
    orbit = g.act(y)
    return float(np.min(np.linalg.norm(orbit - x, axis=-1)))


def comparability_volume(x: np.ndarray, r: float, s: DunklStructure) -> float:
    """r^n prod_alpha (|<alpha,x>| + r)^kappa(alpha), comparable to the ball volume."""
    x = np.asarray(x, dtype=float)
    proj = np.abs(s.roots.roots @ x) if s.roots.rank else np.zeros(0)
    return float(r ** s.dimension * np.prod((proj + r) ** s.roots.kappa))


def ball_volume(
    x: np.ndarray, r: float, s: DunklStructure, grid: "WeightedGrid"
) -> float:
    """Quadrature of d(omega) over the open ball B(x, r)."""
    x = np.atleast_1d(np.asarray(x, dtype=float))
    if r <= 0:
        raise ValueError("radius must be positive")
    if np.any(np.abs(x) + r > grid.spec.L + 1e-12):
        raise ValueError(f"ball B({x}, {r}) exits the box [-{grid.spec.L}, {grid.spec.L}]^n")
    inside = np.linalg.norm(grid.points - x, axis=1) < r
    return float(np.sum(grid.masses[inside]))


def z2(kappa: float = 0.5) -> RootSystem:
    a = np.sqrt(2.0)
    return RootSystem(roots=[[a], [-a]], kappa=[kappa, kappa], dimension=1)


def z2xz2(kappa: float | Sequence[float] = 0.5) -> RootSystem:
    k1, k2 = (kappa, kappa) if np.isscalar(kappa) else kappa
    a = np.sqrt(2.0)
    roots = [[a, 0.0], [-a, 0.0], [0.0, a], [0.0, -a]]
    return RootSystem(roots=roots, kappa=[k1, k1, k2, k2], dimension=2)


PRESETS = {"z2": z2, "z2xz2": z2xz2}


def preset(name: str, kappa=0.5) -> RootSystem:
    try:
        return PRESETS[name](kappa)
    except KeyError:
        raise RootSystemError(f"unknown preset {name!r}; choose from {sorted(PRESETS)}")
