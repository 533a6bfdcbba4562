"""Rank-one heat kernel by the even/odd Hankel split.

For Z2 on R with multiplicity kappa on both roots, d(omega) = 2^kappa |x|^{2 kappa} dx.
Even functions evolve under the Bessel operator of order kappa - 1/2 and
odd functions x g(|x|) under order kappa + 1/2, so

    H_t(x, y) = (p_{kappa-1/2}(|x|, |y|) + x y p_{kappa+1/2}(|x|, |y|)) / 2^{kappa+1}

with p_nu(r, s) = int_0^inf exp(-t xi^2) (r s)^-nu J_nu(r xi) J_nu(s xi) xi d xi.
"""

from __future__ import annotations

import numpy as np
from scipy import special

from .reflection import DunklStructure


def _reduced_bessel(nu: float, z: np.ndarray) -> np.ndarray:
    """z^-nu J_nu(z), continuous at z = 0."""
    z = np.asarray(z, dtype=float)
    limit = 1.0 / (2.0**nu * special.gamma(nu + 1.0))
    safe = np.where(z == 0, 1.0, z)
    return np.where(z == 0, limit, safe ** (-nu) * special.jv(nu, safe))


def _check_rank_one(structure: DunklStructure | None) -> None:
    if structure is None:
        return
    roots = structure.roots
    if roots.dimension != 1 or roots.rank != 2 or structure.group.order != 2:
        raise ValueError("the Hankel reference needs the rank-one Z2 configuration")


def bessel_heat(nu: float, t: float, r, s, nodes: int = 600) -> np.ndarray:
    """p_nu(r, s) by Gauss-Legendre quadrature of the Hankel integral."""
    r, s = np.broadcast_arrays(np.asarray(r, float), np.asarray(s, float))
    xi_max = np.sqrt(60.0 / t)  # exp(-60) below double-precision relevance
    xg, wg = special.roots_legendre(nodes)
    xi = 0.5 * xi_max * (xg + 1.0)
    wxi = 0.5 * xi_max * wg * np.exp(-t * xi**2) * xi ** (2 * nu + 1)
    jr = _reduced_bessel(nu, r[..., None] * xi)
    js = _reduced_bessel(nu, s[..., None] * xi)
    return np.sum(jr * js * wxi, axis=-1)


def bessel_heat_closed(nu: float, t: float, r, s) -> np.ndarray:
    """Weber's integral: (1/2t) (rs)^-nu exp(-(r^2+s^2)/4t) I_nu(rs/2t)."""
    r, s = np.broadcast_arrays(np.asarray(r, float), np.asarray(s, float))
    z = r * s / (2 * t)
    zero = z == 0
    rs = np.where(zero, 1.0, r * s)
    val = rs ** (-nu) * np.exp(-((r - s) ** 2) / (4 * t)) * special.ive(nu, np.where(zero, 1.0, z))
    # small-argument limit of (rs)^-nu I_nu(rs/2t)
    lim = (4 * t) ** (-nu) / special.gamma(nu + 1) * np.exp(-(r**2 + s**2) / (4 * t))
    return np.where(zero, lim, val) / (2 * t)


def hankel_reference(
    t: float, x, y, kappa: float, structure: DunklStructure | None = None, nodes: int = 600
) -> np.ndarray:
    """Heat kernel H_t(x, y) w.r.t. d(omega) for rank-one Z2, by numerical Hankel quadrature."""
    _check_rank_one(structure)
    if t <= 0:
        raise ValueError("t must be positive")
    x, y = np.broadcast_arrays(np.asarray(x, float), np.asarray(y, float))
    r, s = np.abs(x), np.abs(y)
    even = bessel_heat(kappa - 0.5, t, r, s, nodes)
    odd = bessel_heat(kappa + 0.5, t, r, s, nodes)
    return (even + x * y * odd) / 2.0 ** (kappa + 1.0)


def hankel_closed_form(t: float, x, y, kappa: float) -> np.ndarray:
    x, y = np.broadcast_arrays(np.asarray(x, float), np.asarray(y, float))
    r, s = np.abs(x), np.abs(y)
    even = bessel_heat_closed(kappa - 0.5, t, r, s)
    odd = bessel_heat_closed(kappa + 0.5, t, r, s)
    return (even + x * y * odd) / 2.0 ** (kappa + 1.0)
