"""Wall-clock scaling of the full pipeline over row or feature sweeps."""
from __future__ import annotations

import dataclasses
from dataclasses import dataclass

import numpy as np

from .decision import PipelineConfig, run_pipeline
from .tabular import ProblemType, SynthSpec, generate

PHASES = {
    "total": "Total",
    "forest": "Forest",
    "pca": "Pca",
    "mlp_selection": "MlpSelection",
    "mlp_extraction": "MlpExtraction",
    "decision": "Decision",
}


@dataclass(frozen=True)
class BenchRecord:
    n_rows: int
    n_features: int
    phase: str
    wall_time: float
    seed: int
    repeat: int


def bench_point(problem_type: ProblemType, n_rows: int, n_features: int, repeats: int,
                seed: int, config: PipelineConfig | None = None) -> list[BenchRecord]:
    data = generate(SynthSpec(problem_type, n_rows, n_features, seed=seed))
    config = dataclasses.replace(config or PipelineConfig(), seed=seed)
    records = []
    for rep in range(repeats):
        clock: dict = {}
        run_pipeline(data, config, clock)
        for key, name in PHASES.items():
            records.append(BenchRecord(n_rows, n_features, name, clock[key], seed, rep))
    return records


def sweep(problem_type: ProblemType, points: list[tuple[int, int]], repeats: int = 3,
          seed: int = 1, config: PipelineConfig | None = None, progress=None) -> list[BenchRecord]:
    if not points:
        raise ValueError("empty sweep")
    out = []
    for n_rows, n_features in points:
        recs = bench_point(problem_type, n_rows, n_features, repeats, seed, config)
        out.extend(recs)
        if progress is not None:
            progress(n_rows, n_features, mean_total(recs))
    return out


def mean_total(records: list[BenchRecord]) -> float:
    return float(np.mean([r.wall_time for r in records if r.phase == "Total"]))


def min_total(records: list[BenchRecord]) -> float:
    """Least noisy estimate when every repeat does identical (seeded) work."""
    return float(np.min([r.wall_time for r in records if r.phase == "Total"]))


def growth_ratios(records: list[BenchRecord], statistic=mean_total
                  ) -> list[tuple[tuple[int, int], tuple[int, int], float]]:
    """Ratio of Total time between consecutive sweep points, in sweep order."""
    points: list[tuple[int, int]] = []
    for r in records:
        if (r.n_rows, r.n_features) not in points:
            points.append((r.n_rows, r.n_features))
    means = {
        p: statistic([r for r in records if (r.n_rows, r.n_features) == p]) for p in points
    }
    return [(a, b, means[b] / means[a]) for a, b in zip(points, points[1:])]


def records_csv(records: list[BenchRecord]) -> str:
    lines = ["n_rows,n_features,phase,repeat,wall_time,seed"]
    lines += [f"{r.n_rows},{r.n_features},{r.phase},{r.repeat},{r.wall_time!r},{r.seed}"
              for r in records]
    return "\n".join(lines) + "\n"
