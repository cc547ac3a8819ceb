"""Ridge tournament sweep over seeds: trend fraction and lower-bias gain per seed."""

import argparse

import numpy as np

from bvgame.ridge import TournamentSpec, synth_data, tournament


def main():
    ap = argparse.ArgumentParser(description=__doc__)
    ap.add_argument("--seeds", type=int, default=10)
    ap.add_argument("--n", type=int, default=2000)
    ap.add_argument("--p", type=int, default=8)
    ap.add_argument("--noise-sd", type=float, default=1.0)
    ap.add_argument("--repetitions", type=int, default=20)
    ap.add_argument("--lam-max", type=float, default=1.0)
    args = ap.parse_args()

    grid = tuple(np.linspace(0.0, args.lam_max, 11))
    print("seed  trend1  trend2  gain1(lo,hi)      gain2(lo,hi)")
    for seed in range(args.seeds):
        data = synth_data(args.n, args.p, noise_sd=args.noise_sd, seed=seed)
        pm = tournament(data, TournamentSpec(grid, repetitions=args.repetitions, seed=seed))
        g1, g2 = pm.lower_bias_gain(1), pm.lower_bias_gain(2)
        print(f"{seed:4d}  {pm.trend_fraction(1):.3f}   {pm.trend_fraction(2):.3f}   "
              f"{g1[0]:7.1f},{g1[1]:7.1f}   {g2[0]:7.1f},{g2[1]:7.1f}")


if __name__ == "__main__":
    main()
