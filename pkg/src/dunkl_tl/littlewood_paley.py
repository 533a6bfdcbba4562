"""Dyadic cubes, D_k and D_k^M, sampled coefficients and the norm families."""

from __future__ import annotations

from dataclasses import dataclass, field

import numpy as np

from .dunkl_operator import KernelOperator, SemigroupFamily
from .grid import WeightedGrid, lp_norm

_TIE_REL = 1e-9


class InvalidParameters(ValueError):
    pass


@dataclass(frozen=True)
class ScaleWindow:
    k_min: int = -3
    k_max: int = 6
    M: int = 2

    def __post_init__(self):
        if self.k_min >= self.k_max:
            raise ValueError("need k_min < k_max")
        if self.M < 0:
            raise ValueError("window width M must be nonnegative")

    @property
    def scales(self) -> range:
        return range(self.k_min, self.k_max + 1)

    def neighbours(self, k: int) -> range:
        """Scales l with |k - l| <= M, clipped to the window."""
        return range(max(k - self.M, self.k_min), min(k + self.M, self.k_max) + 1)

    def cube_side(self, k: int) -> float:
        return 2.0 ** (-k - self.M)


@dataclass(frozen=True, eq=False)
class CubeLevel:
    """Nonempty dyadic cubes of one side length partitioning the grid points."""

    side: float
    ids: np.ndarray  # (ncubes, n) integer lattice index, cube = side * [id, id + 1)
    keys: np.ndarray  # sorted scalar encoding of ids
    member: np.ndarray  # (npoints,) cube index of each grid point
    sample: np.ndarray  # (ncubes,) grid index of x_Q
    omega: np.ndarray  # (ncubes,) omega(Q) by quadrature
    scale: int | None = None

    @property
    def size(self) -> int:
        return self.ids.shape[0]

    @property
    def centers(self) -> np.ndarray:
        return (self.ids + 0.5) * self.side


def _encode(ids: np.ndarray, base: int = 1 << 20) -> np.ndarray:
    ids = np.atleast_2d(ids).astype(np.int64) + base // 2
    key = np.zeros(ids.shape[0], dtype=np.int64)
    for a in range(ids.shape[1]):
        key = key * base + ids[:, a]
    return key


def build_level(grid: WeightedGrid, side: float, scale: int | None = None) -> CubeLevel:
    raw = np.floor(grid.points / side).astype(np.int64)
    keys, first, member = np.unique(_encode(raw), return_index=True, return_inverse=True)
    member = member.ravel()
    ids = raw[first]
    omega = np.bincount(member, weights=grid.masses, minlength=keys.size)
    centers = (ids + 0.5) * side
    dist = np.linalg.norm(grid.points - centers[member], axis=1)
    # nearest point to the center, ties broken by lowest grid index
    rounded = np.rint(dist / (_TIE_REL * side)).astype(np.int64)
    order = np.lexsort((np.arange(grid.size), rounded, member))
    firsts = np.ones(order.size, dtype=bool)
    firsts[1:] = member[order][1:] != member[order][:-1]
    sample = order[firsts]
    return CubeLevel(side=side, ids=ids, keys=keys, member=member, sample=sample,
                     omega=omega, scale=scale)


def root_level(grid: WeightedGrid) -> CubeLevel:
    """The whole box as a single cube."""
    n = grid.spec.n
    sample = int(np.argmin(np.linalg.norm(grid.points, axis=1)))
    return CubeLevel(
        side=2.0 * grid.spec.L, ids=np.zeros((1, n), dtype=np.int64),
        keys=np.zeros(1, dtype=np.int64), member=np.zeros(grid.size, dtype=np.int64),
        sample=np.array([sample]), omega=np.array([grid.masses.sum()]),
    )


@dataclass(eq=False)
class DyadicGrid:
    grid: WeightedGrid
    window: ScaleWindow
    levels: dict[int, CubeLevel]
    top: list[CubeLevel]  # coarser lattice levels up to the whole box, finest first

    def __getitem__(self, k: int) -> CubeLevel:
        return self.levels[k]

    def ancestor_index(self, fine: CubeLevel, coarse: CubeLevel) -> np.ndarray:
        """Index in ``coarse`` of the cube containing each cube of ``fine``."""
        if coarse.size == 1:
            return np.zeros(fine.size, dtype=np.int64)
        anc = np.floor(fine.centers / coarse.side).astype(np.int64)
        idx = np.searchsorted(coarse.keys, _encode(anc))
        if np.any(idx >= coarse.size) or np.any(coarse.keys[np.minimum(idx, coarse.size - 1)] != _encode(anc)):
            raise ValueError("dyadic levels are not nested")
        return idx


def build_dyadic_grid(grid: WeightedGrid, window: ScaleWindow) -> DyadicGrid:
    levels = {k: build_level(grid, window.cube_side(k), scale=k) for k in window.scales}
    top = []
    side = 2.0 * window.cube_side(window.k_min)
    while side <= grid.spec.L:
        top.append(build_level(grid, side))
        side *= 2.0
    top.append(root_level(grid))
    return DyadicGrid(grid=grid, window=window, levels=levels, top=top)


@dataclass(frozen=True)
class TLParams:
    alpha: float
    p: float
    q: float  # np.inf for the sup variant

    def validate(self, N: float) -> None:
        verdict = validate_params(self.alpha, self.p, self.q, N)
        if not verdict.ok:
            raise InvalidParameters(verdict.message)


@dataclass(frozen=True)
class ParamVerdict:
    ok: bool
    binding: str
    threshold: float
    message: str


def validate_params(alpha: float, p: float, q: float, N: float) -> ParamVerdict:
    """Check |alpha| < 1 and max{N/(N+1), N/(N+alpha+1)} < p, q."""
    if not abs(alpha) < 1:
        return ParamVerdict(False, "|alpha| < 1", float("nan"), f"|alpha| = {abs(alpha)} violates |alpha| < 1")
    a, b = N / (N + 1), N / (N + alpha + 1)
    threshold, binding = (a, "N/(N+1)") if a >= b else (b, "N/(N+alpha+1)")
    for name, v in (("p", p), ("q", q)):
        if np.isinf(v) and name == "q":
            continue
        if not (threshold < v < np.inf):
            return ParamVerdict(
                False, binding, threshold,
                f"{name} = {v} violates {binding} = {threshold:.6g} < {name} < inf",
            )
    return ParamVerdict(True, binding, threshold, "ok")


class LPSystem:
    """Semigroup family, scale window and dyadic cubes bundled for analysis."""

    def __init__(self, family: SemigroupFamily, window: ScaleWindow):
        if family.k_lo > window.k_min or family.k_hi < window.k_max + 1:
            raise ValueError("semigroup family does not cover the scale window")
        self.family = family
        self.window = window
        self.grid = family.grid
        self.masses = family.masses
        self.dyadic = build_dyadic_grid(self.grid, window)
        self._dk = {k: family.dk(k) for k in window.scales}
        self._dkm = {}

    def dk(self, k: int) -> KernelOperator:
        if k not in self._dk:
            raise KeyError(f"scale {k} outside window {self.window.k_min}..{self.window.k_max}")
        return self._dk[k]

    def dk_window(self, k: int) -> KernelOperator:
        """D_k^M = sum of D_l over |k - l| <= M within the window."""
        if k not in self._dkm:
            terms = [self.dk(l) for l in self.window.neighbours(k)]
            out = terms[0]
            for t in terms[1:]:
                out = out + t
            self._dkm[k] = out
        return self._dkm[k]

    def dk_multiplier(self, k: int) -> np.ndarray:
        return self.family.dk_multiplier(k)

    def window_multiplier(self) -> np.ndarray:
        """Spectral multiplier of sum_k D_k over the window."""
        return sum(self.dk_multiplier(k) for k in self.window.scales)


def dk_operator(k: int, lp: LPSystem, windowed: bool = False) -> KernelOperator:
    return lp.dk_window(k) if windowed else lp.dk(k)


@dataclass(eq=False)
class LPCoefficients:
    values: dict[int, np.ndarray]  # scale -> coefficient per cube
    windowed: bool
    dyadic: DyadicGrid = field(repr=False)

    def scaled(self, alpha: float) -> dict[int, np.ndarray]:
        return {k: 2.0 ** (k * alpha) * np.abs(v) for k, v in self.values.items()}

    def total_energy(self) -> float:
        return float(sum(np.sum(v**2) for v in self.values.values()))


def analyze(
    f: np.ndarray, lp: LPSystem, windowed: bool = False, samples: dict[int, np.ndarray] | None = None
) -> LPCoefficients:
    """lambda_{k,Q} = (D_k f)(x_Q), or (D_k^M f)(x_Q) when ``windowed``.

    ``samples`` optionally replaces the sample point of every cube (grid indices per scale).
    """
    wf = lp.masses * f
    values = {}
    for k in lp.window.scales:
        op = dk_operator(k, lp, windowed)
        idx = lp.dyadic[k].sample if samples is None else samples[k]
        values[k] = op.kernel[idx] @ wf
    return LPCoefficients(values=values, windowed=windowed, dyadic=lp.dyadic)


def random_samples(dyadic: DyadicGrid, seed: int) -> dict[int, np.ndarray]:
    """One seeded random member point per cube, for every window scale."""
    rng = np.random.Generator(np.random.Philox(np.random.SeedSequence(seed)))
    out = {}
    for k, level in dyadic.levels.items():
        keys = level.member + rng.random(level.member.size)  # random order inside each cube
        order = np.argsort(keys, kind="stable")
        firsts = np.ones(order.size, dtype=bool)
        firsts[1:] = level.member[order][1:] != level.member[order][:-1]
        out[k] = order[firsts]
    return out


def sample_covariance_factor(f: np.ndarray, lp: LPSystem, params: TLParams, seed: int) -> float:
    """max/min of tl_norm with centre samples versus seeded random member samples."""
    a = tl_norm_from_coefficients(analyze(f, lp), params)
    b = tl_norm_from_coefficients(analyze(f, lp, samples=random_samples(lp.dyadic, seed)), params)
    if a == 0 and b == 0:
        return 1.0
    return max(a, b) / min(a, b)


def q_function(c: LPCoefficients, alpha: float, q: float) -> np.ndarray:
    """S_q^alpha on the grid; q = inf takes the pointwise sup over (k, Q)."""
    if q <= 0:
        raise ValueError("q must be positive")
    dg = c.dyadic
    scaled = c.scaled(alpha)
    if np.isinf(q):
        out = np.zeros(dg.grid.size)
        for k, v in scaled.items():
            out = np.maximum(out, v[dg[k].member])
        return out
    acc = np.zeros(dg.grid.size)
    for k, v in scaled.items():
        acc += v[dg[k].member] ** q
    return acc ** (1.0 / q)


def tl_norm(f: np.ndarray, lp: LPSystem, params: TLParams, validate_for: float | None = None) -> float:
    """||S_q^alpha(f)||_p with plain D_k coefficients."""
    if validate_for is not None:
        params.validate(validate_for)
    c = analyze(f, lp, windowed=False)
    return tl_norm_from_coefficients(c, params)


def tl_norm_from_coefficients(c: LPCoefficients, params: TLParams) -> float:
    return lp_norm(q_function(c, params.alpha, params.q), params.p, c.dyadic.grid)


def _conjugate(q: float) -> float:
    return q / (q - 1.0)


def cmo_from_coefficients(c: LPCoefficients, alpha: float, q: float, p: float) -> float:
    """sup_P (omega(P)^-(q/p - q/q') sum_{Q in P} omega(Q) |2^{k alpha} c_Q|^q)^{1/q}.

    P runs over window cubes (with Q at the same or finer scales) and the
    coarser lattice levels up to the whole box (with Q at every scale).
    """
    if not (0 < p <= 1 < q < np.inf):
        raise InvalidParameters(f"CMO needs 0 < p <= 1 < q < inf, got p={p}, q={q}")
    dg = c.dyadic
    expo = q / p - q / _conjugate(q)
    contrib = {k: dg[k].omega * (2.0 ** (k * alpha) * np.abs(v)) ** q for k, v in c.values.items()}
    scales = sorted(contrib)
    best = 0.0
    for j, k0 in enumerate(scales):
        P = dg[k0]
        acc = np.zeros(P.size)
        for k in scales[j:]:
            np.add.at(acc, dg.ancestor_index(dg[k], P), contrib[k])
        best = max(best, _cmo_sup(acc, P.omega, expo, q))
    for P in dg.top:
        acc = np.zeros(P.size)
        for k in scales:
            np.add.at(acc, dg.ancestor_index(dg[k], P), contrib[k])
        best = max(best, _cmo_sup(acc, P.omega, expo, q))
    return best


def _cmo_sup(acc, omega, expo, q) -> float:
    ok = omega > 0
    if not np.any(ok):
        return 0.0
    return float(np.max((acc[ok] * omega[ok] ** (-expo)) ** (1.0 / q)))


def cmo_norm(f: np.ndarray, lp: LPSystem, alpha: float, q: float, p: float, windowed: bool = True) -> float:
    return cmo_from_coefficients(analyze(f, lp, windowed), alpha, q, p)


def f_infty_p_norm(f: np.ndarray, lp: LPSystem, alpha: float, p: float, windowed: bool = True) -> float:
    """|| sup_{k,Q} 2^{k alpha} |D_k^M f(x_Q)| chi_Q ||_p, p >= 1."""
    if p < 1:
        raise InvalidParameters(f"the sup norm family needs p >= 1, got {p}")
    c = analyze(f, lp, windowed)
    return lp_norm(q_function(c, alpha, np.inf), p, lp.grid)


def f_infty_infty_from_coefficients(c: LPCoefficients, alpha: float) -> float:
    return float(max(np.max(v) for v in c.scaled(alpha).values()))


def f_infty_infty_norm(f: np.ndarray, lp: LPSystem, alpha: float, windowed: bool = True) -> float:
    """sup_{k,Q} 2^{k alpha} |D_k^M f(x_Q)|."""
    return f_infty_infty_from_coefficients(analyze(f, lp, windowed), alpha)
