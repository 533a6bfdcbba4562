"""Spread max/min over y of the four dual norms of D_k(., y), on (0, L/2] and on the annulus 1 <= |y| <= 2."""

import argparse

import numpy as np

from dunkl_tl.config import RunConfig
from dunkl_tl.pipeline import Setting
from dunkl_tl.verification import DUALITY_CASES, default_sample_points, lemma51_battery


def main():
    ap = argparse.ArgumentParser(description=__doc__)
    ap.add_argument("--m", type=int, default=512)
    args = ap.parse_args()

    st = Setting(RunConfig(m=args.m))
    g = st.grid
    x = g.points[:, 0]
    annulus = np.flatnonzero((x >= 1) & (x <= 2))
    samples = {
        "(0, L/2]": default_sample_points(st.lp),
        "1<=y<=2": annulus[np.linspace(0, len(annulus) - 1, 10).round().astype(int)],
    }
    for name, idx in samples.items():
        print(f"y sample {name}")
        for k in (0, 1, 2):
            row = []
            for c in DUALITY_CASES:
                r = lemma51_battery(st.lp, k, c, sample_points=idx, N=st.N)
                row.append(f"{c}: {r.extra['spread']:6.2f}")
            print(f"  k={k}  " + "  ".join(row))


if __name__ == "__main__":
    main()
