"""Wall-clock sweeps over rows and features, with per-phase breakdown."""
import argparse
from pathlib import Path

import numpy as np

from dimcut import bench
from dimcut.tabular import ProblemType


def report(records):
    for a, b, r in bench.growth_ratios(records):
        print(f"growth {a[0]}x{a[1]} -> {b[0]}x{b[1]}: {r:.2f}")
    phases = sorted({r.phase for r in records})
    print("point".ljust(12) + "".join(p.rjust(14) for p in phases))
    for point in dict.fromkeys((r.n_rows, r.n_features) for r in records):
        means = [np.mean([r.wall_time for r in records
                          if (r.n_rows, r.n_features) == point and r.phase == p]) for p in phases]
        print(f"{point[0]}x{point[1]}".ljust(12) + "".join(f"{m:14.3f}" for m in means))


def main():
    ap = argparse.ArgumentParser(description=__doc__)
    ap.add_argument("--rows", default="1000,2000,4000,8000")
    ap.add_argument("--features", default="5,10,20,40")
    ap.add_argument("--problem", default="regression")
    ap.add_argument("--repeats", type=int, default=3)
    ap.add_argument("--out", type=Path, default=Path("results/scaling"))
    args = ap.parse_args()
    args.out.mkdir(parents=True, exist_ok=True)
    problem = ProblemType.parse(args.problem)

    progress = lambda n, p, t: print(f"  {n}x{p}: {t:.2f}s", flush=True)  # noqa: E731
    rows = bench.sweep(problem, [(int(n), 8) for n in args.rows.split(",")],
                       args.repeats, progress=progress)
    (args.out / "rows.csv").write_text(bench.records_csv(rows))
    report(rows)
    feats = bench.sweep(problem, [(2000, int(p)) for p in args.features.split(",")],
                        args.repeats, progress=progress)
    (args.out / "features.csv").write_text(bench.records_csv(feats))
    report(feats)


if __name__ == "__main__":
    main()
