"""Build every layer of a run from a RunConfig."""

from __future__ import annotations

from functools import cached_property

import numpy as np

from .config import RunConfig
from .dunkl_operator import SemigroupFamily, assemble_dunkl_laplacian, spectral_decompose
from .frame import BandSubspace, FrameOperatorSet, build_operators, contraction_estimate
from .grid import GridSpec, build_grid, make_test_function
from .littlewood_paley import LPSystem, ScaleWindow
from .reflection import DunklStructure, RootSystem, preset


def root_system(cfg: RunConfig) -> RootSystem:
    if cfg.roots is None:
        return preset(cfg.preset, cfg.kappa)
    kappa = cfg.kappa
    if np.isscalar(kappa):
        kappa = [kappa] * len(cfg.roots)
    return RootSystem(roots=np.array(cfg.roots), kappa=kappa, dimension=len(cfg.roots[0]))


class Setting:
    """Structure, grid, spectral decomposition, semigroups and dyadic cubes for one config."""

    def __init__(self, cfg: RunConfig = RunConfig()):
        self.cfg = cfg
        self.structure = DunklStructure(root_system(cfg))
        self.grid = build_grid(GridSpec(L=cfg.L, m=cfg.m, n=self.structure.dimension), self.structure)
        self.laplacian = assemble_dunkl_laplacian(self.grid, self.structure)
        self.decomposition = spectral_decompose(self.laplacian, cfg.clamp_tol)
        self.window = ScaleWindow(cfg.k_min, cfg.k_max, cfg.M)
        # D_k needs P at 2^-k and 2^-k-1; one extra coarse time is kept for H
        self.family = SemigroupFamily(self.decomposition, cfg.k_min - 1, cfg.k_max + 1)
        self.lp = LPSystem(self.family, self.window)

    @property
    def N(self) -> float:
        return self.structure.homogeneous_dimension

    @cached_property
    def band(self) -> BandSubspace:
        return BandSubspace(self.lp, self.cfg.band_tol)

    @cached_property
    def operators(self) -> FrameOperatorSet:
        return build_operators(self.lp)

    @cached_property
    def rho_hat(self) -> float:
        return contraction_estimate(self.operators, self.band if self.cfg.subspace else None)

    def with_M(self, M: int) -> "Setting":
        """Same spectral data, different window width (cubes and operators rebuilt)."""
        other = object.__new__(Setting)
        other.__dict__.update({k: v for k, v in self.__dict__.items()
                               if k not in ("band", "operators", "rho_hat")})
        other.cfg = self.cfg.with_overrides(M=M)
        other.window = ScaleWindow(self.cfg.k_min, self.cfg.k_max, M)
        other.lp = LPSystem(self.family, other.window)
        return other

    def bandlimited(self, seed: int, source: str = "bumps") -> np.ndarray:
        return make_test_function(
            "bandlimited", seed, self.grid, window=self.cfg.test_window, family=self.family, source=source
        )
