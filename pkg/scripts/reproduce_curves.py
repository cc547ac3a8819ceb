"""Regenerate the utility-curve data and equilibrium summaries for every family.

Writes CSV/JSON files under ``--out-dir`` via the library; plotting is left to the reader.
"""

import argparse
import json
from pathlib import Path

from bvgame.equilibrium import FrontierGrid, expected_curve, expost_curve, find_pne
from bvgame.game import GameConfig

EXPOST_A = (0.5, 1.0, 2.0)
EXPECTED_MU_J = (0.0, 0.25, 0.5, 0.75)


def main():
    ap = argparse.ArgumentParser(description=__doc__)
    ap.add_argument("--out-dir", type=Path, default=Path("out/curves"))
    ap.add_argument("--grid-step", type=float, default=0.01)
    ap.add_argument("--pne-step", type=float, default=0.05)
    args = ap.parse_args()
    args.out_dir.mkdir(parents=True, exist_ok=True)

    summary = {}
    for fam in ("normal", "laplace", "logistic", "uniform", "triangle"):
        grid = FrontierGrid.regular(fam, args.grid_step)
        curves = [expost_curve(grid, a) for a in EXPOST_A]
        curves += [expected_curve(grid, m) for m in EXPECTED_MU_J]
        for c in curves:
            c.write_csv(args.out_dir / f"{c.stem}.csv")
        pne = find_pne(FrontierGrid.regular(fam, args.pne_step), threads=4)
        summary[fam] = {
            "monotone": {c.stem: c.is_nonincreasing(1e-12) for c in curves},
            "argmax": {c.stem: c.argmax() for c in curves},
            "pne": pne.equilibria,
        }
        print(f"{fam:>9}: PNE {pne.equilibria}")

    for reward in (0.5, 5.0):
        grid = FrontierGrid.regular("normal", args.grid_step, GameConfig(reward=reward, frontier=True))
        for m in EXPECTED_MU_J:
            expected_curve(grid, m).write_csv(args.out_dir / f"expected_normal_muj{m:g}_R{reward:g}.csv")

    (args.out_dir / "summary.json").write_text(json.dumps(summary, indent=2) + "\n")


if __name__ == "__main__":
    main()
