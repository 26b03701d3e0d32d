"""Regenerates the brute-force linear-boundary crossing oracle.

Streams 10^6 Euler paths at dt = 1e-4 and prints the empirical crossing
probabilities next to the closed form; the frozen values in
tests/test_verify.py came from this script.  Takes several minutes.
"""

import json
import sys

from ifpt.verify import analytic_bm_linear_cdf, bm_linear_crossing_mc


def main():
    out = {}
    cases = [
        (1.0, 1.0, [1.0], 20260808),
        (1.0, 0.5, [0.25, 0.5, 1.0, 1.5, 2.0], 20260809),
    ]
    for c, gamma, ts, seed in cases:
        mc = bm_linear_crossing_mc(c, gamma, ts, n_paths=1_000_000, dt=1e-4, seed=seed)
        for t, m in zip(ts, mc):
            a = analytic_bm_linear_cdf(c, gamma, t)
            print(f"c={c} gamma={gamma} t={t}: mc={m:.6f} analytic={a:.6f} diff={a - m:+.6f}")
        out[f"c{c}_g{gamma}"] = {"ts": ts, "mc": mc.tolist()}
    json.dump(out, sys.stdout, indent=1)
    print()


if __name__ == "__main__":
    main()
