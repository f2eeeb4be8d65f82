"""Run the six reference scenarios end to end and print each report.

Cases 5 and 6 are large; by default their row counts are shrunk by
``--shrink`` (use ``--shrink 1`` for the full sizes).
"""
import argparse
import time
from pathlib import Path

from dimcut.decision import PipelineConfig, render_report, report_to_kv, run_pipeline
from dimcut.tabular import ProblemType, SynthSpec, generate, save_csv

REG, CLS = ProblemType.REGRESSION, ProblemType.CLASSIFICATION

# name -> (problem, rows, features, informative, interpretability, integrity, target)
CASES = {
    "case1": (REG, 500, 5, None, 0.5, 0.5, 0.90),
    "case2": (CLS, 500, 5, None, 0.4, 0.6, 0.75),
    "case3": (REG, 500, 25, 10, 0.8, 0.2, None),
    "case4": (CLS, 500, 25, None, 0.5, 0.5, None),
    "case5": (CLS, 1_000_000, 8, None, 0.4, 0.6, None),
    "case6": (CLS, 10_000, 100, None, 0.8, 0.2, None),
}


def main():
    ap = argparse.ArgumentParser(description=__doc__)
    ap.add_argument("--cases", default=",".join(CASES))
    ap.add_argument("--shrink", type=int, default=50, help="row divisor for case5 and case6")
    ap.add_argument("--seed", type=int, default=1)
    ap.add_argument("--out", type=Path, default=Path("results/cases"))
    args = ap.parse_args()

    for name in args.cases.split(","):
        problem, rows, feats, informative, w1, w2, target = CASES[name]
        if name in ("case5", "case6"):
            rows = max(rows // args.shrink, 500)
        noise = 1.0 if problem is REG else 10.0
        data = generate(SynthSpec(problem, rows, feats, n_informative=informative,
                                  noise_scale=noise, seed=args.seed))
        t0 = time.perf_counter()
        report = run_pipeline(data, PipelineConfig(w1, w2, target, seed=args.seed))
        elapsed = time.perf_counter() - t0
        out = args.out / name
        out.mkdir(parents=True, exist_ok=True)
        (out / "report.txt").write_text(render_report(report))
        (out / "report.kv").write_text(report_to_kv(report))
        save_csv(report.reduced_dataset, out / "reduced.csv")
        print(f"== {name}: {rows}x{feats} {problem.value} ({elapsed:.1f}s)")
        print(render_report(report))


if __name__ == "__main__":
    main()
