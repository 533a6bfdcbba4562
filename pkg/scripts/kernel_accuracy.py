"""Kernel accuracy against closed forms: Gaussian, Cauchy, the Dirichlet-box series and Hankel quadrature.

Errors are max |A - B| / max |B| over the inner half box.
"""

import argparse

import numpy as np

from dunkl_tl.config import RunConfig
from dunkl_tl.dunkl_operator import heat_kernel, poisson_kernel, subordinated_poisson
from dunkl_tl.hankel import hankel_reference
from dunkl_tl.pipeline import Setting


def sup_rel(a, b):
    return np.max(np.abs(a - b)) / np.max(np.abs(b))


def dirichlet_box_poisson(x, t, L, terms=20000):
    j = np.arange(1, terms)
    phase = np.sin(np.outer(x + L, j * np.pi / (2 * L)))
    return (phase * np.exp(-t * j * np.pi / (2 * L))) @ phase.T / L


def main():
    ap = argparse.ArgumentParser(description=__doc__)
    ap.add_argument("--m", type=int, default=512)
    args = ap.parse_args()

    st0 = Setting(RunConfig(kappa=0.0, m=args.m))
    g = st0.grid
    idx = np.flatnonzero(g.inner_half_box())
    x = g.points[idx, 0]
    D = x[:, None] - x[None, :]
    blk = np.ix_(idx, idx)
    print("kappa = 0")
    for t in (0.25, 0.5, 1.0):
        H = heat_kernel(t, st0.decomposition).kernel[blk]
        P = poisson_kernel(t, st0.decomposition).kernel[blk]
        gauss = np.exp(-D**2 / (4 * t)) / np.sqrt(4 * np.pi * t)
        cauchy = t / (np.pi * (t**2 + D**2))
        box = dirichlet_box_poisson(x, t, g.spec.L)
        print(f"  t={t:<5g} heat/gauss {sup_rel(H, gauss):.1e}  poisson/cauchy {sup_rel(P, cauchy):.1e}  "
              f"poisson/box {sup_rel(P, box):.1e}  box/cauchy {sup_rel(box, cauchy):.1e}")

    st = Setting(RunConfig(m=args.m))
    g = st.grid
    inner = np.flatnonzero(g.inner_half_box())
    sample = inner[np.linspace(0, len(inner) - 1, 10).round().astype(int)]
    xs = g.points[sample, 0]
    H = heat_kernel(0.5, st.decomposition).kernel[np.ix_(sample, sample)]
    ref = hankel_reference(0.5, xs[:, None], xs[None, :], st.cfg.kappa)
    print(f"kappa = {st.cfg.kappa}: spectral vs Hankel at t=0.5, 10x10 sample: {sup_rel(H, ref):.1e}")
    P = poisson_kernel(1.0, st.decomposition).kernel[np.ix_(inner, inner)]
    for nodes in (40, 80, 160):
        S = subordinated_poisson(1.0, st.decomposition, nodes).kernel[np.ix_(inner, inner)]
        print(f"  subordination, {nodes} Laguerre nodes, t=1: {sup_rel(S, P):.1e}")
    m = st.family.mass(1.0)[inner]
    print(f"  interior mass defect at t=1: {np.max(np.abs(m - 1)):.1e}")


if __name__ == "__main__":
    main()
