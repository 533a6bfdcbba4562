"""Discrete Calderon reproducing formula as an analysis/synthesis codec.

On the grid the window-truncated identity (sum_k D_k)^2 splits exactly as
T_M + R_1 + R_2. T_M samples D_k f at one point per dyadic cube and
resynthesizes with D_k^M kernel columns; it is inverted by Richardson
iteration on a spectral band where the truncated identity is close to I.
"""

from __future__ import annotations

from dataclasses import asdict, dataclass, field
from typing import Sequence

import numpy as np

from .dunkl_operator import weighted_operator_norm
from .littlewood_paley import (
    LPCoefficients,
    LPSystem,
    TLParams,
    analyze,
    tl_norm_from_coefficients,
)


@dataclass(frozen=True)
class NeumannConfig:
    tol: float = 1e-4
    max_iter: int = 40
    subspace: bool = True
    band_tol: float = 0.05

    def __post_init__(self):
        if not self.tol > 0:
            raise ValueError("tol must be positive")
        if self.max_iter < 1:
            raise ValueError("max_iter must be at least 1")
        if not 0 < self.band_tol < 1:
            raise ValueError("band_tol must lie in (0, 1)")


class BandSubspace:
    """Span of the eigenvectors on which 1 - Phi(s)^2 <= band_tol.

    Phi is the multiplier of sum_k D_k over the window, so on this band the
    truncated identity is within ``band_tol`` of the identity.
    """

    def __init__(self, lp: LPSystem, band_tol: float = 0.05):
        phi = lp.window_multiplier()
        self.selected = np.flatnonzero(1.0 - phi**2 <= band_tol)
        if self.selected.size == 0:
            raise ValueError(f"no eigenmode has 1 - Phi^2 <= {band_tol}; widen the window")
        self.band_tol = band_tol
        self.masses = lp.masses
        self.basis = lp.family.decomposition.vectors[:, self.selected]
        self.identity_defect = float(np.max(np.abs(1.0 - phi[self.selected] ** 2)))

    @property
    def dimension(self) -> int:
        return self.basis.shape[1]

    def coordinates(self, f: np.ndarray) -> np.ndarray:
        return self.basis.T @ (self.masses * f)

    def project(self, f: np.ndarray) -> np.ndarray:
        return self.basis @ self.coordinates(f)

    def compress(self, matrix: np.ndarray) -> np.ndarray:
        """Matrix of Pi A Pi in omega-orthonormal band coordinates."""
        return self.basis.T @ (self.masses[:, None] * (matrix @ self.basis))


@dataclass(eq=False)
class FrameOperatorSet:
    T_M: np.ndarray
    R_1: np.ndarray
    R_2: np.ndarray
    I_tilde: np.ndarray
    masses: np.ndarray
    M: int
    lp: LPSystem = field(repr=False)

    def splitting_residual(self) -> float:
        resid = self.T_M + self.R_1 + self.R_2 - self.I_tilde
        return weighted_operator_norm(resid, self.masses)


def build_operators(lp: LPSystem) -> FrameOperatorSet:
    """Assemble T_M, R_1 = sum_{|k-l|>M} D_l D_k and the per-cube quadrature defect R_2."""
    w = lp.masses
    scales = list(lp.window.scales)
    mats = {k: lp.dk(k).matrix for k in scales}
    total = sum(mats.values())
    npts = w.size
    T_M = np.zeros((npts, npts))
    R_1 = np.zeros((npts, npts))
    R_2 = np.zeros((npts, npts))
    for k in scales:
        level = lp.dyadic[k]
        KM = lp.dk_window(k)
        sampled = (KM.kernel[:, level.sample] * level.omega[None, :]) @ mats[k][level.sample]
        T_M += sampled
        R_2 += KM.matrix @ mats[k] - sampled
        far = [l for l in scales if abs(k - l) > lp.window.M]
        if far:
            R_1 += sum(mats[l] for l in far) @ mats[k]
    return FrameOperatorSet(
        T_M=T_M, R_1=R_1, R_2=R_2, I_tilde=total @ total, masses=w, M=lp.window.M, lp=lp
    )


def contraction_estimate(ops: FrameOperatorSet, band: BandSubspace | None = None) -> float:
    """Largest singular value of I_tilde - T_M on the band (or the whole grid)."""
    diff = ops.I_tilde - ops.T_M
    if band is None:
        return weighted_operator_norm(diff, ops.masses)
    return float(np.linalg.norm(band.compress(diff), 2))


@dataclass
class InversionResult:
    residual_history: list[float]
    iterations: int
    converged: bool
    projection_loss: float
    fallback_residual: float | None = None


def invert_tm(
    f: np.ndarray,
    ops: FrameOperatorSet,
    cfg: NeumannConfig = NeumannConfig(),
    band: BandSubspace | None = None,
) -> tuple[np.ndarray, InversionResult]:
    """Richardson iteration h <- Pi(h + Pi(f - T_M h)) for T_M h = f on the band."""
    w = ops.masses

    def norm(v):
        return float(np.sqrt(np.sum(w * v * v)))

    if cfg.subspace:
        if band is None:
            band = BandSubspace(ops.lp, cfg.band_tol)
        proj = band.project
    else:
        proj = lambda v: v  # noqa: E731
    f0 = proj(f)
    fn = norm(f)
    loss = norm(f - f0) / fn if fn > 0 else 0.0
    f0n = norm(f0)
    h = np.zeros_like(f0)
    if f0n == 0:
        return h, InversionResult([0.0], 0, True, loss)

    history = []
    converged = False
    iterations = 0
    while True:
        r = proj(f0 - ops.T_M @ h)
        history.append(norm(r))
        if history[-1] <= cfg.tol * f0n:
            converged = True
            break
        if iterations == cfg.max_iter:
            break
        h = proj(h + r)
        iterations += 1

    result = InversionResult(history, iterations, converged, loss)
    if not converged:
        # direct solve of the same (restricted) system, kept as a diagnostic only
        if cfg.subspace:
            c = np.linalg.solve(band.compress(ops.T_M), band.coordinates(f0))
            h_direct = band.basis @ c
        else:
            h_direct = np.linalg.solve(ops.T_M, f0)
        result.fallback_residual = norm(proj(f0 - ops.T_M @ h_direct)) / f0n
    return h, result


def synthesize(coeffs: LPCoefficients | dict[int, np.ndarray], lp: LPSystem) -> np.ndarray:
    """sum_k sum_Q omega(Q) lambda_Q D_k^M(., x_Q)."""
    values = coeffs.values if isinstance(coeffs, LPCoefficients) else coeffs
    out = np.zeros(lp.grid.size)
    for k, lam in values.items():
        level = lp.dyadic[k]
        out += lp.dk_window(k).kernel[:, level.sample] @ (level.omega * lam)
    return out


def reconstruct(h: np.ndarray, lp: LPSystem) -> np.ndarray:
    """T_M h through its coefficient form: analysis with D_k, synthesis with D_k^M."""
    return synthesize(analyze(h, lp, windowed=False), lp)


@dataclass
class FrameReport:
    M: int
    rho_hat: float
    band_dimension: int
    band_identity_defect: float
    projection_loss: float
    residual_history: list[float]
    step_ratios: list[float]
    iterations: int
    converged: bool
    fallback_residual: float | None
    f_l2: float
    h_l2: float
    l2_ratio: float
    reconstruction_residual: float
    out_of_band_leakage: float
    tl: list[dict] = field(default_factory=list)
    seed: int | None = None

    def to_dict(self) -> dict:
        return asdict(self)


def codec_roundtrip(
    f: np.ndarray,
    ops: FrameOperatorSet,
    params: Sequence[TLParams] = (),
    cfg: NeumannConfig = NeumannConfig(),
    band: BandSubspace | None = None,
    rho_hat: float | None = None,
    seed: int | None = None,
) -> FrameReport:
    """Invert T_M, resynthesize, and compare L^2 and TL norms of f and h."""
    lp = ops.lp
    if cfg.subspace and band is None:
        band = BandSubspace(lp, cfg.band_tol)
    if rho_hat is None:
        rho_hat = contraction_estimate(ops, band if cfg.subspace else None)
    h, inv = invert_tm(f, ops, cfg, band)
    f0 = band.project(f) if cfg.subspace else f
    rebuilt = reconstruct(h, lp)
    in_band = band.project(rebuilt) if cfg.subspace else rebuilt
    norm = lp.grid.norm
    f_l2, h_l2 = norm(f0), norm(h)
    scale = f_l2 if f_l2 > 0 else 1.0
    hist = inv.residual_history
    ratios = [b / a for a, b in zip(hist[:-1], hist[1:]) if a > 0]

    tl_rows = []
    cf, ch = analyze(f0, lp), analyze(h, lp)
    for prm in params:
        nf, nh = tl_norm_from_coefficients(cf, prm), tl_norm_from_coefficients(ch, prm)
        tl_rows.append({
            "alpha": prm.alpha, "p": prm.p, "q": prm.q,
            "f_norm": nf, "h_norm": nh, "ratio": nh / nf if nf > 0 else float("nan"),
        })
    return FrameReport(
        M=ops.M,
        rho_hat=float(rho_hat),
        band_dimension=band.dimension if band is not None else lp.grid.size,
        band_identity_defect=band.identity_defect if band is not None else float("nan"),
        projection_loss=inv.projection_loss,
        residual_history=[float(v) for v in hist],
        step_ratios=[float(v) for v in ratios],
        iterations=inv.iterations,
        converged=inv.converged,
        fallback_residual=inv.fallback_residual,
        f_l2=f_l2,
        h_l2=h_l2,
        l2_ratio=h_l2 / scale if f_l2 > 0 else float("nan"),
        reconstruction_residual=norm(f0 - in_band) / scale,
        out_of_band_leakage=norm(rebuilt - in_band) / scale,
        tl=tl_rows,
        seed=seed,
    )
