"""Contraction rho_hat(M), its decay fit, and Neumann iteration counts per window width."""

import argparse

import numpy as np

from dunkl_tl.config import RunConfig
from dunkl_tl.frame import NeumannConfig, codec_roundtrip
from dunkl_tl.pipeline import Setting
from dunkl_tl.verification import almost_orthogonality_decay, contraction_sweep


def main():
    ap = argparse.ArgumentParser(description=__doc__)
    ap.add_argument("--kappa", type=float, default=0.5)
    ap.add_argument("--m", type=int, default=512)
    ap.add_argument("--max-M", type=int, default=4)
    ap.add_argument("--seed", type=int, default=42)
    args = ap.parse_args()

    st = Setting(RunConfig(kappa=args.kappa, m=args.m))
    sweep = contraction_sweep(st, range(args.max_M + 1))
    print(" M  rho_hat  iterations  max_step  l2_ratio")
    for M, rho in sweep.items():
        s = st.with_M(M)
        rep = codec_roundtrip(s.bandlimited(args.seed), s.operators, (), NeumannConfig(), s.band, rho)
        step = max(rep.step_ratios, default=np.nan)
        print(f"{M:2d}  {rho:7.3f}  {rep.iterations:10d}  {step:8.3f}  {rep.l2_ratio:8.3f}"
              + ("" if rep.converged else "  (not converged)"))
    dp = almost_orthogonality_decay(st.lp, rho_sweep=sweep)
    print(f"delta fit: {dp.delta.value:.3f} (R2 {dp.delta.r2:.3f})")
    print(f"eps' fit: {dp.epsilon_prime.value:.3f} (R2 {dp.epsilon_prime.r2:.3f}), "
          f"gamma: {dp.gamma.value:.2f}")


if __name__ == "__main__":
    main()
