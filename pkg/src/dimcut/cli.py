"""Command-line entry point: ``dimcut {run,synth,validate,bench}``.

Exit codes: 0 success, 1 runtime failure, 2 usage error.
"""
from __future__ import annotations

import argparse
import logging
import sys
from pathlib import Path

from . import bench as bench_mod
from .decision import (
    REPORT_KEYS_HELP,
    PipelineConfig,
    cut_scores_csv,
    importance_csv,
    render_report,
    report_to_kv,
    run_pipeline,
)
from .forest import ForestConfig, Source
from .mlp import Activation, MlpConfig
from .tabular import (
    DEFAULT_SEED,
    ProblemType,
    dataset_to_csv_text,
    generate,
    load_csv,
    parse_synth,
    write_atomic,
)
from .validate import run_validation

log = logging.getLogger("dimcut")


def _unit(text: str) -> float:
    try:
        v = float(text)
    except ValueError:
        raise argparse.ArgumentTypeError(f"{text!r} is not a number") from None
    if not 0.0 <= v <= 1.0:
        raise argparse.ArgumentTypeError(f"{text!r} must lie in [0, 1]")
    return v


def _int_list(text: str) -> list[int]:
    try:
        values = [int(v) for v in text.split(",") if v.strip()]
    except ValueError:
        raise argparse.ArgumentTypeError(f"{text!r} is not a comma-separated integer list") from None
    if any(v < 1 for v in values):
        raise argparse.ArgumentTypeError("sweep values must be positive")
    return values


def build_parser() -> argparse.ArgumentParser:
    p = argparse.ArgumentParser(prog="dimcut", description=__doc__,
                                formatter_class=argparse.RawDescriptionHelpFormatter)
    p.add_argument("-v", "--verbose", action="store_true")
    sub = p.add_subparsers(dest="command", required=True)

    run = sub.add_parser("run", help="choose between feature selection and extraction",
                         epilog=REPORT_KEYS_HELP,
                         formatter_class=argparse.RawDescriptionHelpFormatter)
    src = run.add_mutually_exclusive_group(required=True)
    src.add_argument("--input", type=Path, help="CSV with header; last column is the target")
    src.add_argument("--synth", help='synthetic spec, e.g. "regression,500,5,seed=1"')
    run.add_argument("--problem", choices=[t.value for t in ProblemType])
    run.add_argument("--interp", type=_unit, help="interpretability weight (default 0.5)")
    run.add_argument("--integ", type=_unit, help="integrity weight (default 1 - interp)")
    run.add_argument("--resolution", type=float,
                     help="target resolution in (0, 1); omitted: automatic cut")
    run.add_argument("--seed", type=int, default=DEFAULT_SEED)
    run.add_argument("--out", type=Path, required=True)
    run.add_argument("--trees", type=int, default=ForestConfig.n_trees)
    run.add_argument("--folds", type=int, default=MlpConfig.k_folds)
    run.add_argument("--max-epochs", type=int, default=MlpConfig.max_epochs)
    run.add_argument("--activation", choices=[a.value for a in Activation], default="relu")
    run.add_argument("--best-fold", action="store_true",
                     help="decide on the best fold score instead of the CV mean")
    run.add_argument("--standardize-pca", action="store_true")

    synth = sub.add_parser("synth", help="write a synthetic dataset as CSV")
    synth.add_argument("spec", help='"kind,rows,features[,seed=N,informative=N,noise=X,classes=N]"')
    synth.add_argument("--seed", type=int, help="overrides seed= in the spec")
    synth.add_argument("--out", type=Path, required=True)

    val = sub.add_parser("validate", help="random-case check of the decision rule")
    val.add_argument("--n", type=int, default=250)
    val.add_argument("--seed", type=int, default=DEFAULT_SEED)
    val.add_argument("--w-interp", type=_unit, help="pin the interpretability weight")
    val.add_argument("--out", type=Path, required=True)

    b = sub.add_parser("bench", help="pipeline wall-clock over a rows or features sweep")
    sweep = b.add_mutually_exclusive_group(required=True)
    sweep.add_argument("--rows-sweep", type=_int_list)
    sweep.add_argument("--features-sweep", type=_int_list)
    b.add_argument("--rows", type=int, default=2000, help="rows for a features sweep")
    b.add_argument("--features", type=int, default=8, help="features for a rows sweep")
    b.add_argument("--problem", choices=[t.value for t in ProblemType], default="regression")
    b.add_argument("--repeats", type=int, default=3)
    b.add_argument("--seed", type=int, default=DEFAULT_SEED)
    b.add_argument("--out", type=Path, required=True)
    return p


def _ensure_dir(path: Path) -> None:
    path.mkdir(parents=True, exist_ok=True)


def cmd_run(args, parser) -> int:
    interp, integ = args.interp, args.integ
    if interp is None and integ is None:
        interp = integ = 0.5
    elif interp is None:
        interp = 1.0 - integ
    elif integ is None:
        integ = 1.0 - interp
    if abs(interp + integ - 1.0) > 1e-9:
        parser.error(f"--interp and --integ must follow the alpha / 1 - alpha pattern "
                     f"(sum to 1); got {interp} + {integ}")
    if args.resolution is not None and not 0.0 < args.resolution < 1.0:
        parser.error("--resolution must lie strictly between 0 and 1")
    if args.trees < 1 or args.folds < 2 or args.max_epochs < 1:
        parser.error("--trees >= 1, --folds >= 2 and --max-epochs >= 1 are required")
    if args.input is not None and args.problem is None:
        parser.error("--problem is required with --input")
    if args.synth is not None:
        try:
            spec = parse_synth(args.synth)
        except ValueError as exc:
            parser.error(str(exc))
        if args.problem is not None and ProblemType(args.problem) is not spec.problem_type:
            parser.error("--problem does not match the synthetic spec")

    config = PipelineConfig(
        interpretability_weight=interp,
        integrity_weight=integ,
        target_resolution=args.resolution,
        forest=ForestConfig(n_trees=args.trees),
        mlp=MlpConfig(k_folds=args.folds, max_epochs=args.max_epochs,
                      activation=Activation(args.activation)),
        seed=args.seed,
        use_best_fold=args.best_fold,
        standardize_pca=args.standardize_pca,
    )
    target = "auto" if args.resolution is None else args.resolution
    print(f"parameters: interpretability={interp} integrity={integ} resolution={target} "
          f"seed={args.seed}")
    data = generate(spec) if args.synth is not None else load_csv(args.input, args.problem)
    report = run_pipeline(data, config)

    _ensure_dir(args.out)
    text = render_report(report)
    write_atomic(args.out / "report.txt", text)
    write_atomic(args.out / "report.kv", report_to_kv(report))
    write_atomic(args.out / "reduced.csv", dataset_to_csv_text(report.reduced_dataset))
    write_atomic(args.out / "importance_rf.csv", importance_csv(report, Source.FOREST))
    write_atomic(args.out / "importance_pca.csv", importance_csv(report, Source.PCA))
    write_atomic(args.out / "cut_scores.csv", cut_scores_csv(report))
    print(text, end="")
    return 0


def cmd_synth(args, parser) -> int:
    text = args.spec if args.seed is None else f"{args.spec},seed={args.seed}"
    try:
        spec = parse_synth(text)
    except ValueError as exc:
        parser.error(str(exc))
    if args.out.parent != Path(""):
        _ensure_dir(args.out.parent)
    data = generate(spec)
    write_atomic(args.out, dataset_to_csv_text(data))
    print(f"wrote {data.n_rows}x{data.n_features} {spec.problem_type.value} dataset to {args.out}")
    return 0


def cmd_validate(args, parser) -> int:
    if args.n < 1:
        parser.error("--n must be >= 1")
    result = run_validation(args.n, args.seed, args.w_interp)
    _ensure_dir(args.out)
    write_atomic(args.out / "validation_scatter.csv", result.scatter_csv())
    print(result.summary())
    return 0 if result.verdict else 1


def cmd_bench(args, parser) -> int:
    if args.repeats < 1:
        parser.error("--repeats must be >= 1")
    if args.rows_sweep is not None:
        points = [(r, args.features) for r in args.rows_sweep]
    else:
        points = [(args.rows, f) for f in args.features_sweep]
    if not points:
        parser.error("empty sweep")

    def progress(n_rows, n_features, total):
        print(f"rows={n_rows} features={n_features} mean_total={total:.3f}s", flush=True)

    records = bench_mod.sweep(ProblemType(args.problem), points, args.repeats, args.seed,
                              progress=progress)
    _ensure_dir(args.out)
    write_atomic(args.out / "bench.csv", bench_mod.records_csv(records))
    best = bench_mod.growth_ratios(records, bench_mod.min_total)
    for (a, b, ratio), (*_, fastest) in zip(bench_mod.growth_ratios(records), best):
        print(f"growth {a[0]}x{a[1]} -> {b[0]}x{b[1]}: {ratio:.2f} (min over repeats {fastest:.2f})")
    print("note: absolute times depend on DIMCUT_THREADS and BLAS threading; trends do not")
    return 0


COMMANDS = {"run": cmd_run, "synth": cmd_synth, "validate": cmd_validate, "bench": cmd_bench}


def main(argv=None) -> int:
    parser = build_parser()
    args = parser.parse_args(argv)
    logging.basicConfig(level=logging.DEBUG if args.verbose else logging.WARNING,
                        format="%(levelname)s %(name)s: %(message)s")
    try:
        return COMMANDS[args.command](args, parser)
    except (ValueError, RuntimeError, OSError) as exc:
        log.debug("command failed", exc_info=True)
        print(f"dimcut: error: {exc}", file=sys.stderr)
        return 1


if __name__ == "__main__":
    sys.exit(main())
