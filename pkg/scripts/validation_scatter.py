"""Random-case check of the decision rule, with an ASCII view of the scatter."""
import argparse
from pathlib import Path

import numpy as np

from dimcut.validate import run_validation


def main():
    ap = argparse.ArgumentParser(description=__doc__)
    ap.add_argument("--n", type=int, default=250)
    ap.add_argument("--seeds", type=int, default=10)
    ap.add_argument("--out", type=Path, default=Path("results/validation"))
    args = ap.parse_args()
    args.out.mkdir(parents=True, exist_ok=True)

    for seed in range(args.seeds):
        res = run_validation(args.n, seed)
        (args.out / f"scatter_seed{seed}.csv").write_text(res.scatter_csv())
        print(f"seed={seed}: {res.summary()}")

    # 20x10 grid of seed 0: S = selection, E = extraction, * = both
    res = run_validation(args.n, 0)
    grid = np.full((10, 20), " ")
    for c in res.cases:
        col = min(int(c.interpret_s * 20), 19)
        row = 9 - min(int(c.integ_s * 10), 9)
        mark = c.label.value[0]
        grid[row, col] = mark if grid[row, col] in (" ", mark) else "*"
    print("integ_s ^")
    for line in grid:
        print("        |" + "".join(line))
    print("        +" + "-" * 20 + "> interpret_s")


if __name__ == "__main__":
    main()
