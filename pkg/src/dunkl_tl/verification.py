"""Numerical stress tests: almost orthogonality, duality, kernel columns,
norm equivalence, the maximal function and the operator splitting.

Empirical constants are reported, never compared with theoretical ones;
pass/fail flags are stability criteria (finiteness, slopes, spreads).
"""

from __future__ import annotations

import logging
from dataclasses import asdict, dataclass, field, replace
from typing import Sequence

import numpy as np
from scipy import stats

from .dunkl_operator import weighted_operator_norm
from .frame import FrameOperatorSet, NeumannConfig, codec_roundtrip
from .grid import lp_norm
from .littlewood_paley import (
    LPCoefficients,
    LPSystem,
    TLParams,
    analyze,
    cmo_from_coefficients,
    f_infty_infty_from_coefficients,
    q_function,
    tl_norm_from_coefficients,
    validate_params,
)

log = logging.getLogger(__name__)

SPLIT_TOL = 1e-10
MIN_FIT_POINTS = 6


def trial_seeds(seed: int, count: int) -> list[int]:
    """Independent per-trial seeds from one master seed."""
    return [int(s) for s in np.random.SeedSequence(seed).generate_state(count, dtype=np.uint32)]


@dataclass(frozen=True)
class Fit:
    value: float
    bracket: tuple[float, float]  # value +- 2 standard errors
    r2: float
    points: int


def _slope_fit(x: np.ndarray, y: np.ndarray) -> Fit:
    res = stats.linregress(x, y)
    half = 2.0 * res.stderr
    return Fit(float(res.slope), (float(res.slope - half), float(res.slope + half)),
               float(res.rvalue**2), int(x.size))


# ---------------------------------------------------------------- orthogonality


@dataclass
class DecayParams:
    epsilon: Fit | None
    epsilon_prime: Fit | None
    gamma: Fit | None
    delta: Fit | None
    gap_norms: dict[int, float]
    status: str = "ok"  # or "insufficient-data"

    @property
    def passed(self) -> bool:
        f = self.epsilon_prime
        return self.status == "ok" and f is not None and f.value >= 0.3 and f.r2 >= 0.9

    def to_dict(self) -> dict:
        d = asdict(self)
        d["gap_norms"] = {str(k): v for k, v in self.gap_norms.items()}
        d["passed"] = self.passed
        return d


def gap_norms(lp: LPSystem, max_gap: int = 5, operator: np.ndarray | None = None) -> dict[int, float]:
    """max over window pairs with |k - j| = g of ||D_k D_j|| in L^2(omega).

    With ``operator`` T the norms are those of D_k T D_j.
    """
    w = lp.masses
    scales = list(lp.window.scales)
    mats = {k: lp.dk(k).matrix for k in scales}
    if operator is not None:
        right = {j: operator @ mats[j] for j in scales}
    else:
        right = mats
    out: dict[int, float] = {}
    for k in scales:
        for j in scales:
            g = abs(k - j)
            if g <= max_gap:
                out[g] = max(out.get(g, 0.0), weighted_operator_norm(mats[k] @ right[j], w))
    return dict(sorted(out.items()))


def operator_decay(lp: LPSystem, operator: np.ndarray, max_gap: int = 5) -> tuple[dict[int, float], Fit | None]:
    """Gap norms of D_k T D_j and their fitted log2 slope (None below MIN_FIT_POINTS gaps)."""
    norms = gap_norms(lp, max_gap, operator)
    if len(norms) < MIN_FIT_POINTS or min(norms.values()) <= 0:
        return norms, None
    return norms, _slope_fit(np.array(list(norms), dtype=float), -np.log2(list(norms.values())))


def _volume(points: np.ndarray, r: np.ndarray, lp: LPSystem) -> np.ndarray:
    """r^n prod (|<alpha,x>| + r)^kappa for arrays of points and radii."""
    roots = lp.grid.structure.roots
    n = points.shape[-1]
    proj = np.abs(points @ roots.roots.T)
    return r**n * np.prod((proj + r[..., None]) ** roots.kappa, axis=-1)


def _orbit_distance(x: np.ndarray, y: np.ndarray, lp: LPSystem) -> np.ndarray:
    group = lp.grid.structure.group
    orbit = np.einsum("gab,jb->gja", group.elements, y)
    return np.min(np.linalg.norm(x[None, :, None, :] - orbit[:, None, :, :], axis=-1), axis=0)


def _spatial_gamma(lp: LPSystem, eps_prime: float, stride: int, bins: int = 12) -> Fit:
    """Slope of the upper envelope of log2(|D_kD_j| V 2^{|k-j| eps'}) against log2(r/(r+d))."""
    grid = lp.grid
    idx = np.flatnonzero(grid.inner_half_box())[::stride]
    pts = grid.points[idx]
    d = _orbit_distance(pts, pts, lp)
    w = lp.masses
    us, zs = [], []
    for k in lp.window.scales:
        for j in lp.window.scales:
            if j < k:
                continue
            kern = (lp.dk(k).kernel * w[None, :]) @ lp.dk(j).kernel
            kern = kern[np.ix_(idx, idx)]
            r = np.full_like(d, 2.0 ** -min(k, j))
            far = d > r
            vol = np.maximum(_volume(pts[:, None, :].repeat(len(idx), 1), r + d, lp),
                             _volume(pts[None, :, :].repeat(len(idx), 0), r + d, lp))
            z = np.log2(np.abs(kern) * vol * 2.0 ** ((j - k) * eps_prime) + 1e-300)
            us.append(np.log2(r / (r + d))[far])
            zs.append(z[far])
    u, z = np.concatenate(us), np.concatenate(zs)
    edges = np.linspace(u.min(), u.max(), bins + 1)
    which = np.clip(np.digitize(u, edges) - 1, 0, bins - 1)
    bu, bz = [], []
    for b in range(bins):
        sel = which == b
        if np.any(sel):
            top = np.argmax(z[sel])
            bu.append(u[sel][top])
            bz.append(z[sel][top])
    return _slope_fit(np.array(bu), np.array(bz))


def _regularity(lp: LPSystem, k: int = 0, shifts: int = 6) -> Fit:
    """Hoelder exponent of x -> D_k(x, y) away from the diagonal, capped at 1."""
    grid = lp.grid
    if grid.spec.n != 1:
        raise ValueError("the regularity fit is implemented on the line only")
    x = grid.points[:, 0]
    kern = lp.dk(k).kernel
    inner = np.flatnonzero(grid.inner_half_box())
    hs, diffs = [], []
    for s in range(shifts):
        step = 2**s
        rows = inner[inner + step < grid.size]
        sep = np.abs(x[rows][:, None] - x[inner][None, :])
        ok = sep >= 2.0 ** -k
        delta = np.abs(kern[rows + step][:, inner] - kern[rows][:, inner])
        rel = delta / np.max(np.abs(kern))
        hs.append(step * grid.delta)
        diffs.append(np.max(rel[ok]))
    fit = _slope_fit(np.log2(hs), np.log2(diffs))
    lo, hi = fit.bracket
    return replace(fit, value=min(fit.value, 1.0), bracket=(min(lo, 1.0), min(hi, 1.0)))


def contraction_sweep(setting, Ms: Sequence[int] = range(0, 5)) -> dict[int, float]:
    """rho_hat(M) on the band for each window width."""
    return {int(M): float(setting.with_M(M).rho_hat) for M in Ms}


def almost_orthogonality_decay(
    lp: LPSystem,
    max_gap: int = 5,
    rho_sweep: dict[int, float] | None = None,
    stride: int = 8,
) -> DecayParams:
    norms = gap_norms(lp, max_gap)
    if len(norms) < MIN_FIT_POINTS:
        log.warning("orthogonality fit refused: %d gaps available, need %d", len(norms), MIN_FIT_POINTS)
        return DecayParams(None, None, None, None, norms, status="insufficient-data")
    gaps = np.array(list(norms), dtype=float)
    eps_prime = _slope_fit(gaps, -np.log2(list(norms.values())))
    gamma = _spatial_gamma(lp, eps_prime.value, stride)
    eps = _regularity(lp) if lp.grid.spec.n == 1 else None
    delta = None
    if rho_sweep and len(rho_sweep) >= 2:
        Ms = np.array(sorted(rho_sweep), dtype=float)
        delta = _slope_fit(Ms, -np.log2([rho_sweep[int(M)] for M in Ms]))
    return DecayParams(eps, eps_prime, gamma, delta, norms)


# ---------------------------------------------------------------- batteries


@dataclass
class BatteryReport:
    suite: str
    case: str
    ratios: list[float]
    seeds: list[int]
    skipped: list[int] = field(default_factory=list)
    resolution_factor: float | None = None
    extra: dict = field(default_factory=dict)
    passed: bool = True

    @property
    def c_hat(self) -> float:
        return float(max(self.ratios)) if self.ratios else float("nan")

    def to_dict(self) -> dict:
        d = asdict(self)
        d["c_hat"] = self.c_hat
        return d


@dataclass(frozen=True)
class DualityCase:
    tag: str
    alpha: float
    p: float
    q: float
    N_shift: float = 0.0  # N (1/p - 1), filled in by ``with_dimension``

    @property
    def dual(self) -> dict:
        """Indices of the norm applied to g."""
        a, p, q = self.alpha, self.p, self.q
        if self.tag == "A":
            return {"alpha": -a, "p": p / (p - 1), "q": q / (q - 1)}
        if self.tag == "B":
            return {"alpha": -a, "q": q / (q - 1), "p": p}
        if self.tag == "C":
            return {"alpha": -a, "p": p / (p - 1), "q": np.inf}
        if self.tag == "D":
            return {"alpha": -a + self.N_shift, "q": np.inf}
        raise ValueError(f"unknown duality case {self.tag!r}")

    def with_dimension(self, N: float) -> "DualityCase":
        return replace(self, N_shift=N * (1.0 / self.p - 1.0))

    def check(self, N: float) -> None:
        verdict = validate_params(self.alpha, self.p, self.q, N)
        if not verdict.ok:
            raise ValueError(verdict.message)
        side = {
            "A": 1 < self.p and 1 < self.q,
            "B": self.p <= 1 < self.q,
            "C": 1 < self.p and self.q <= 1,
            "D": self.p <= 1 and self.q <= 1,
        }[self.tag]
        if not side:
            raise ValueError(f"indices (p, q) = ({self.p}, {self.q}) do not fit case {self.tag}")

    def f_norm(self, c: LPCoefficients, grid) -> float:
        return tl_norm_from_coefficients(c, TLParams(self.alpha, self.p, self.q))

    def g_norm(self, c: LPCoefficients, grid) -> float:
        d = self.dual
        if self.tag == "A":
            return lp_norm(q_function(c, d["alpha"], d["q"]), d["p"], grid)
        if self.tag == "B":
            return cmo_from_coefficients(c, d["alpha"], d["q"], d["p"])
        if self.tag == "C":
            return lp_norm(q_function(c, d["alpha"], np.inf), d["p"], grid)
        return f_infty_infty_from_coefficients(c, d["alpha"])


DUALITY_CASES = {
    "A": DualityCase("A", 0.0, 2.0, 2.0),
    "B": DualityCase("B", 0.0, 0.9, 2.0),
    "C": DualityCase("C", 0.0, 2.0, 0.9),
    "D": DualityCase("D", 0.0, 0.9, 0.9),
}


def duality_ratio(f: np.ndarray, g: np.ndarray, lp: LPSystem, case: DualityCase) -> float | None:
    """|<f,g>| / (||f|| ||g||_dual), None when a norm vanishes."""
    nf = case.f_norm(analyze(f, lp, windowed=False), lp.grid)
    ng = case.g_norm(analyze(g, lp, windowed=True), lp.grid)
    if nf == 0 or ng == 0:
        return None
    return abs(lp.grid.inner(f, g)) / (nf * ng)


def duality_battery(
    setting,
    case: DualityCase | str,
    trials: int = 50,
    seed: int = 7,
    source: str = "bumps",
    reference=None,
) -> BatteryReport:
    """Seeded band-limited pairs (f, g); ``reference`` is a second Setting for the resolution factor."""
    if isinstance(case, str):
        case = DUALITY_CASES[case]
    case = case.with_dimension(setting.N)
    case.check(setting.N)

    def run(st):
        seeds = trial_seeds(seed, 2 * trials)
        ratios, used, skipped = [], [], []
        for i in range(trials):
            f = st.bandlimited(seeds[2 * i], source)
            g = st.bandlimited(seeds[2 * i + 1], source)
            r = duality_ratio(f, g, st.lp, case)
            if r is None:
                log.info("duality trial %d skipped: zero norm", i)
                skipped.append(i)
                continue
            ratios.append(float(r))
            used.append(seeds[2 * i])
        return ratios, used, skipped

    ratios, used, skipped = run(setting)
    report = BatteryReport("duality", case.tag, ratios, used, skipped,
                           extra={"alpha": case.alpha, "p": case.p, "q": case.q,
                                  "dual": {k: float(v) for k, v in case.dual.items()}})
    report.passed = bool(ratios) and bool(np.all(np.isfinite(ratios)))
    if reference is not None:
        ref, _, _ = run(reference)
        a, b = report.c_hat, max(ref) if ref else float("nan")
        report.resolution_factor = float(max(a / b, b / a))
        report.extra["reference_c_hat"] = float(b)
        report.extra["reference_points"] = int(reference.grid.size)
        report.passed = report.passed and report.resolution_factor <= 2.0
    return report


def default_sample_points(lp: LPSystem, count: int = 10) -> np.ndarray:
    """Grid indices nearest to evenly spaced points on (0, L/2] along the first axis."""
    L = lp.grid.spec.L
    target = np.zeros((count, lp.grid.spec.n))
    target[:, 0] = 0.5 * L * np.arange(1, count + 1) / count
    d = np.linalg.norm(lp.grid.points[None, :, :] - target[:, None, :], axis=-1)
    return np.argmin(d, axis=1)


def column_norm(col: np.ndarray, lp: LPSystem, case: DualityCase) -> float:
    """Dual-space norm of a kernel column, coefficients taken with plain D_j."""
    c = analyze(col, lp, windowed=False)
    return case.g_norm(c, lp.grid)


def lemma51_battery(
    lp: LPSystem,
    k: int,
    case: DualityCase | str,
    sample_points: Sequence[int] | None = None,
    N: float | None = None,
    spread_limit: float = 3.0,
) -> BatteryReport:
    """Norms of y -> D_k(., y) over sampled grid indices y; sup and spread max/min."""
    if k not in lp.window.scales:
        raise ValueError(f"scale {k} is outside the window")
    if isinstance(case, str):
        case = DUALITY_CASES[case]
    if N is not None:
        case = case.with_dimension(N)
    idx = default_sample_points(lp) if sample_points is None else np.asarray(sample_points)
    kern = lp.dk(k).kernel
    vals = [float(column_norm(kern[:, i], lp, case)) for i in idx]
    finite = bool(np.all(np.isfinite(vals))) and min(vals) > 0
    spread = max(vals) / min(vals) if finite else float("inf")
    report = BatteryReport(
        "lemma51", case.tag, vals, [int(i) for i in idx],
        extra={"k": k, "sup": max(vals), "spread": spread,
               "y": lp.grid.points[idx].tolist()},
    )
    report.passed = finite and (case.tag not in ("B", "D") or spread <= spread_limit)
    return report


def norm_equivalence_battery(
    setting,
    params: Sequence[TLParams],
    trials: int = 20,
    seed: int = 0,
    cfg: NeumannConfig | None = None,
) -> BatteryReport:
    """Codec round trips; L^2 ratios in ``ratios``, TL ratios per index tuple in ``extra``."""
    for prm in params:
        prm.validate(setting.N)
    if cfg is None:
        c = setting.cfg
        cfg = NeumannConfig(c.tol, c.max_iter, c.subspace, c.band_tol)
    ops, band, rho = setting.operators, setting.band if cfg.subspace else None, setting.rho_hat
    seeds = trial_seeds(seed, trials)
    l2, tl = [], {str((p.alpha, p.p, p.q)): [] for p in params}
    failures, iters = [], []
    for i, s in enumerate(seeds):
        f = setting.bandlimited(s)
        rep = codec_roundtrip(f, ops, params, cfg, band, rho, seed=s)
        iters.append(rep.iterations)
        if not rep.converged:
            failures.append(i)
        l2.append(rep.l2_ratio)
        for row in rep.tl:
            tl[str((row["alpha"], row["p"], row["q"]))].append(row["ratio"])
    brackets = {k: [min(v), max(v)] for k, v in tl.items()}
    report = BatteryReport(
        "equivalence", "codec", [float(v) for v in l2], seeds,
        extra={"l2_bracket": [min(l2), max(l2)], "tl_ratios": tl, "tl_brackets": brackets,
               "codec_failures": failures, "iterations": iters, "rho_hat": rho},
    )
    report.passed = (
        not failures
        and 0.25 <= min(l2) and max(l2) <= 4.0
        and all(0.1 <= lo and hi <= 10.0 for lo, hi in brackets.values())
    )
    return report


# ---------------------------------------------------------------- maximal function


def radius_menu(grid) -> np.ndarray:
    """Dyadic radii Delta/2, Delta, 2 Delta, ... up to the box half-width."""
    out, r = [], grid.delta / 2.0
    while r <= grid.spec.L:
        out.append(r)
        r *= 2.0
    return np.array(out)


def maximal_function(f: np.ndarray, grid) -> np.ndarray:
    """Mf(x) = max_r omega(B(x,r))^-1 int_B |f| d(omega) over the radius menu."""
    dist = np.linalg.norm(grid.points[:, None, :] - grid.points[None, :, :], axis=-1)
    af = np.abs(f) * grid.masses
    out = np.zeros(grid.size)
    for r in radius_menu(grid):
        ball = dist < r
        avg = (ball @ af) / (ball @ grid.masses)
        out = np.maximum(out, avg)
    return out


def maximal_battery(setting, trials: int = 50, seed: int = 0) -> BatteryReport:
    seeds = trial_seeds(seed, trials)
    g = setting.grid
    ratios = []
    for s in seeds:
        f = setting.bandlimited(s)
        ratios.append(g.norm(maximal_function(f, g)) / g.norm(f))
    report = BatteryReport("maximal", "L2", [float(r) for r in ratios], seeds)
    report.passed = bool(np.all(np.isfinite(ratios)))
    return report


# ---------------------------------------------------------------- splitting


@dataclass
class SplitCheck:
    residual: float
    passed: bool
    r1_norm: float
    r2_norm: float
    injected: bool = False

    def to_dict(self) -> dict:
        return asdict(self)


def identity_split_check(ops: FrameOperatorSet, tol: float = SPLIT_TOL) -> SplitCheck:
    res = ops.splitting_residual()
    return SplitCheck(
        residual=res,
        passed=res <= tol,
        r1_norm=weighted_operator_norm(ops.R_1, ops.masses),
        r2_norm=weighted_operator_norm(ops.R_2, ops.masses),
    )


def inject_fault(ops: FrameOperatorSet, size: float = 1e-3, where: tuple[int, int] | None = None) -> FrameOperatorSet:
    """Copy of ``ops`` with one T_M entry perturbed."""
    i, j = (ops.T_M.shape[0] // 2,) * 2 if where is None else where
    T = ops.T_M.copy()
    T[i, j] += size
    return replace(ops, T_M=T)


def split_self_test(ops: FrameOperatorSet) -> dict:
    clean = identity_split_check(ops)
    faulty = identity_split_check(inject_fault(ops))
    faulty.injected = True
    return {"clean": clean.to_dict(), "injected": faulty.to_dict(),
            "checker_ok": clean.passed and not faulty.passed}


# ---------------------------------------------------------------- semigroups


def semigroup_checks(setting, mass_range: tuple[int, int] = (0, 6)) -> dict:
    """Composition, telescoping, symmetry and mass defects of the cached kernels.

    Masses are taken over the inner half box for t = 2^-k, k in ``mass_range``.
    """
    from .dunkl_operator import heat_kernel, poisson_kernel

    fam, lp = setting.family, setting.lp
    d = fam.decomposition
    w = fam.masses
    comp = {"heat": 0.0, "poisson": 0.0}
    for k in fam.scales:
        for l in range(k, fam.k_hi + 1):  # the semigroups commute
            t, s = 2.0**-k, 2.0**-l
            for name, get, ref in (("heat", fam.heat, heat_kernel), ("poisson", fam.poisson, poisson_kernel)):
                target = ref(t + s, d)
                err = (get(k) @ get(l)).kernel - target.kernel
                rel = weighted_operator_norm(err * w, w) / target.norm()
                comp[name] = max(comp[name], rel)
    a, b = lp.window.k_min, lp.window.k_max
    tele = fam.dk_sum(a, b).kernel - (fam.poisson(a).kernel - fam.poisson(b + 1).kernel)
    telescoping = float(np.max(np.abs(tele)) / np.max(np.abs(fam.poisson(b + 1).kernel)))
    sym = 0.0
    for k in fam.scales:
        for K in (fam.heat(k).kernel, fam.poisson(k).kernel):
            sym = max(sym, float(np.max(np.abs(K - K.T)) / np.max(np.abs(K))))
    inner = setting.grid.inner_half_box()
    mass = {}
    for k in range(mass_range[0], mass_range[1] + 1):
        m = fam.mass(2.0**-k)[inner]
        mass[f"2^-{k}"] = float(np.max(np.abs(m - 1.0)))
    return {
        "composition_heat": comp["heat"],
        "composition_poisson": comp["poisson"],
        "telescoping": telescoping,
        "symmetry": sym,
        "mass_defect": mass,
        "algebra_ok": comp["heat"] <= 1e-10 and comp["poisson"] <= 1e-10
        and telescoping <= 1e-12 and sym <= 1e-10,
        "mass_ok": max(mass.values()) <= 1e-3,
    }
