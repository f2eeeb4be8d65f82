"""Run both reduction pipelines and choose between selection and extraction."""
from __future__ import annotations

import dataclasses
import enum
import time
from dataclasses import dataclass, field
from decimal import ROUND_HALF_UP, Decimal

import numpy as np

from . import mlp, pca, resolution
from .forest import ForestConfig, ImportanceVector, Source, feature_importance, fit_forest
from .mlp import CvResult, MlpConfig, ScoreKind
from .resolution import CutDecision, CutScore
from .tabular import Dataset, ProblemType


class Method(enum.Enum):
    SELECTION = "SELECTION"
    EXTRACTION = "EXTRACTION"


def _check_weights(w_interp: float, w_integ: float) -> None:
    for name, w in (("interpretability", w_interp), ("integrity", w_integ)):
        if not 0.0 <= w <= 1.0:
            raise ValueError(f"{name} weight must lie in [0, 1], got {w!r}")
    if abs(w_interp + w_integ - 1.0) > 1e-9:
        raise ValueError(
            f"interpretability and integrity weights must sum to 1 (alpha, 1 - alpha); "
            f"got {w_interp!r} + {w_integ!r}"
        )


def decide(s_fs: float, s_fe: float, w_interp: float, w_integ: float):
    """Return (interpretability score, integrity score, method); ties favour selection."""
    _check_weights(w_interp, w_integ)
    interpret_s = w_interp * s_fs
    integ_s = w_integ * s_fe
    method = Method.SELECTION if interpret_s >= integ_s else Method.EXTRACTION
    return interpret_s, integ_s, method


@dataclass(frozen=True)
class PipelineConfig:
    interpretability_weight: float = 0.5
    integrity_weight: float = 0.5
    target_resolution: float | None = None  # None: automatic cut
    forest: ForestConfig = field(default_factory=ForestConfig)
    mlp: MlpConfig = field(default_factory=MlpConfig)
    seed: int = 1  # overrides the forest and MLP seeds
    use_best_fold: bool = False
    standardize_pca: bool = False

    def __post_init__(self):
        _check_weights(self.interpretability_weight, self.integrity_weight)
        t = self.target_resolution
        if t is not None and not 0.0 < t < 1.0:
            raise ValueError(f"target resolution must lie in (0, 1), got {t!r}")


@dataclass(frozen=True, eq=False)
class ReductionPlan:
    method: Method
    cut: CutDecision
    kept_original_indices: tuple[int, ...] = ()
    model: pca.PcaModel | None = None

    @property
    def n_components(self) -> int:
        return self.cut.n_kept

    def apply(self, dataset: Dataset) -> Dataset:
        if self.method is Method.SELECTION:
            return dataset.select(self.kept_original_indices)
        return pca.project(self.model, dataset, self.cut.n_kept)


def selection_plan(importance: ImportanceVector, target: float | None) -> ReductionPlan:
    c = resolution.cut(importance, target)
    kept = tuple(int(i) for i in importance.order[: c.n_kept])
    return ReductionPlan(Method.SELECTION, c, kept_original_indices=kept)


def extraction_plan(model: pca.PcaModel, importance: ImportanceVector,
                    target: float | None) -> ReductionPlan:
    return ReductionPlan(Method.EXTRACTION, resolution.cut(importance, target), model=model)


@dataclass(frozen=True, eq=False)
class DecisionReport:
    problem_type: ProblemType
    feature_names: tuple[str, ...]
    n_rows: int
    rf_importance: ImportanceVector
    pca_importance: ImportanceVector
    selection_cut: CutDecision
    extraction_cut: CutDecision
    selection_cv: CvResult
    extraction_cv: CvResult
    interpretability_weight: float
    integrity_weight: float
    interpretability_score: float
    integrity_score: float
    chosen_method: Method
    target_resolution: float | None
    use_best_fold: bool
    reduced_dataset: Dataset | None

    def _acc(self, cv: CvResult) -> float:
        return cv.best_score if self.use_best_fold else cv.mean_score

    @property
    def mlp_accuracy_selection(self) -> float:
        return self._acc(self.selection_cv)

    @property
    def mlp_accuracy_extraction(self) -> float:
        return self._acc(self.extraction_cv)

    @property
    def chosen_cut(self) -> CutDecision:
        return self.selection_cut if self.chosen_method is Method.SELECTION else self.extraction_cut

    @property
    def n_kept(self) -> int:
        return self.chosen_cut.n_kept

    @property
    def achieved_resolution(self) -> float:
        return self.chosen_cut.achieved_resolution

    @property
    def kept_features(self) -> tuple[str, ...]:
        if self.chosen_method is Method.EXTRACTION:
            return pca.component_names(self.n_kept)
        idx = self.rf_importance.order[: self.n_kept]
        return tuple(self.feature_names[i] for i in idx)


def run_pipeline(dataset: Dataset, config: PipelineConfig = PipelineConfig(),
                 timings: dict | None = None) -> DecisionReport:
    """Selection (forest) and extraction (PCA) pipelines, each scored by MLP CV."""
    clock = {} if timings is None else timings
    t_total = time.perf_counter()
    forest_cfg = dataclasses.replace(config.forest, seed=config.seed)
    mlp_cfg = dataclasses.replace(config.mlp, seed=config.seed)
    target = config.target_resolution

    t = time.perf_counter()
    rf_imp = feature_importance(fit_forest(dataset, forest_cfg))
    sel = selection_plan(rf_imp, target)
    clock["forest"] = time.perf_counter() - t

    t = time.perf_counter()
    model = pca.fit_pca(dataset, standardize=config.standardize_pca)
    pca_imp = pca.pca_importance(model)
    ext = extraction_plan(model, pca_imp, target)
    clock["pca"] = time.perf_counter() - t

    selected = sel.apply(dataset)
    extracted = ext.apply(dataset)

    t = time.perf_counter()
    cv_fs = mlp.evaluate(selected, mlp_cfg)
    clock["mlp_selection"] = time.perf_counter() - t
    t = time.perf_counter()
    cv_fe = mlp.evaluate(extracted, mlp_cfg)
    clock["mlp_extraction"] = time.perf_counter() - t

    t = time.perf_counter()
    pick = (lambda cv: cv.best_score) if config.use_best_fold else (lambda cv: cv.mean_score)
    interpret_s, integ_s, method = decide(
        pick(cv_fs), pick(cv_fe), config.interpretability_weight, config.integrity_weight
    )
    report = DecisionReport(
        problem_type=dataset.problem_type,
        feature_names=dataset.feature_names,
        n_rows=dataset.n_rows,
        rf_importance=rf_imp,
        pca_importance=pca_imp,
        selection_cut=sel.cut,
        extraction_cut=ext.cut,
        selection_cv=cv_fs,
        extraction_cv=cv_fe,
        interpretability_weight=config.interpretability_weight,
        integrity_weight=config.integrity_weight,
        interpretability_score=interpret_s,
        integrity_score=integ_s,
        chosen_method=method,
        target_resolution=target,
        use_best_fold=config.use_best_fold,
        reduced_dataset=selected if method is Method.SELECTION else extracted,
    )
    clock["decision"] = time.perf_counter() - t
    clock["total"] = time.perf_counter() - t_total
    return report


# --- rendering and key-value serialization ------------------------------------

def round3(x: float) -> float:
    """Table-style rounding: half away from zero on the shortest decimal repr."""
    return float(Decimal(repr(float(x))).quantize(Decimal("0.001"), rounding=ROUND_HALF_UP))


def _pct(x: float) -> str:
    return f"{100 * x:.1f}%"


def render_report(report: DecisionReport) -> str:
    """Human-readable justification, scores rounded to 3 decimals."""
    r = report
    lines = ["Dimensionality reduction decision", "=" * 33,
             f"Problem type: {r.problem_type.value}; rows: {r.n_rows}; "
             f"initial features: {len(r.feature_names)}",
             f"Weights: interpretability {r.interpretability_weight:.3f}, "
             f"integrity {r.integrity_weight:.3f}", ""]
    lines.append("1. Normalized importance of features (random forest):")
    for i in r.rf_importance.order:
        lines.append(f"     {r.feature_names[i]:<16} {round3(r.rf_importance.scores[i]):.3f}")
    lines.append("2. Normalized importance of components (PCA):")
    for name, v in zip(pca.component_names(len(r.pca_importance.scores)), r.pca_importance.scores):
        lines.append(f"     {name:<16} {round3(v):.3f}")
    kind = "R2" if r.selection_cv.score_kind is ScoreKind.R2 else "accuracy"
    for n, label, cv in ((3, "feature selection", r.selection_cv),
                         (4, "feature extraction", r.extraction_cv)):
        lines.append(f"{n}. MLP {kind} ({label}): {round3(r._acc(cv)):.3f} "
                     f"(mean {round3(cv.mean_score):.3f}, best fold {round3(cv.best_score):.3f})")
    lines.append(f"5. Interpretability score: {round3(r.interpretability_score):.3f}")
    lines.append(f"6. Integrity score: {round3(r.integrity_score):.3f}")
    lines.append(f"7. Chosen method: {r.chosen_method.value}")
    sel_mark = "" if r.chosen_method is Method.SELECTION else " (not used)"
    ext_mark = "" if r.chosen_method is Method.EXTRACTION else " (not used)"
    lines.append(f"8. Number of selected features: {r.selection_cut.n_kept}{sel_mark}")
    lines.append(f"9. Number of principal components: {r.extraction_cut.n_kept}{ext_mark}")
    target = "automatic" if r.target_resolution is None else _pct(r.target_resolution)
    lines.append(f"10. Resolution reached: {_pct(r.achieved_resolution)} (target: {target})")
    lines.append("")
    lines.append("Kept features: " + ", ".join(r.kept_features))
    return "\n".join(lines) + "\n"


def _floats(values) -> str:
    return ",".join(repr(float(v)) for v in values)


def _ints(values) -> str:
    return ",".join(str(int(v)) for v in values)


def _cut_kv(prefix: str, c: CutDecision) -> list[tuple[str, str]]:
    return [
        (f"{prefix}_n_kept", str(c.n_kept)),
        (f"{prefix}_resolution", repr(c.achieved_resolution)),
        (f"{prefix}_cut_positions", _ints(s.position for s in c.scores)),
        (f"{prefix}_cut_lambda", _floats(s.resolution for s in c.scores)),
        (f"{prefix}_cut_weighted_gap", _floats(s.weighted_gap for s in c.scores)),
    ]


def _cv_kv(prefix: str, cv: CvResult) -> list[tuple[str, str]]:
    return [
        (f"mlp_accuracy_{prefix}", repr(cv.mean_score)),
        (f"mlp_accuracy_{prefix}_best", repr(cv.best_score)),
        (f"mlp_fold_scores_{prefix}", _floats(cv.fold_scores)),
        (f"mlp_epochs_{prefix}", _ints(cv.epochs_run)),
    ]


REPORT_KEYS_HELP = """\
report.kv keys (one "key = value" per line, lists comma-separated):
  chosen_method                       SELECTION or EXTRACTION
  problem_type, n_rows, n_features    input description
  feature_names                       original feature names
  interpretability_weight, integrity_weight
  score_mode                          mean or best (fold score fed to the decision)
  rf_importance, rf_order             forest importances (original order) and ranking
  pca_importance                      explained-variance ratios PC1..PCn
  mlp_accuracy_selection[_best]       CV mean / best fold, selection pipeline
  mlp_accuracy_extraction[_best]      CV mean / best fold, extraction pipeline
  mlp_fold_scores_*, mlp_epochs_*     per-fold scores and epochs
  interpretability_score, integrity_score
  n_selected_features, n_principal_components
  selection_*/extraction_* cut fields n_kept, resolution, cut_positions,
                                      cut_lambda, cut_weighted_gap
  target_resolution                   value or "auto"
  n_kept, achieved_resolution         for the chosen method
  kept_features                       column names of reduced.csv
"""


def report_to_kv(report: DecisionReport) -> str:
    r = report
    items: list[tuple[str, str]] = [
        ("chosen_method", r.chosen_method.value),
        ("problem_type", r.problem_type.value),
        ("n_rows", str(r.n_rows)),
        ("n_features", str(len(r.feature_names))),
        ("feature_names", ",".join(r.feature_names)),
        ("interpretability_weight", repr(float(r.interpretability_weight))),
        ("integrity_weight", repr(float(r.integrity_weight))),
        ("score_mode", "best" if r.use_best_fold else "mean"),
        ("rf_importance", _floats(r.rf_importance.scores)),
        ("rf_order", _ints(r.rf_importance.order)),
        ("pca_importance", _floats(r.pca_importance.scores)),
        *_cv_kv("selection", r.selection_cv),
        *_cv_kv("extraction", r.extraction_cv),
        ("interpretability_score", repr(float(r.interpretability_score))),
        ("integrity_score", repr(float(r.integrity_score))),
        ("n_selected_features", str(r.selection_cut.n_kept)),
        ("n_principal_components", str(r.extraction_cut.n_kept)),
        *_cut_kv("selection", r.selection_cut),
        *_cut_kv("extraction", r.extraction_cut),
        ("target_resolution",
         "auto" if r.target_resolution is None else repr(float(r.target_resolution))),
        ("n_kept", str(r.n_kept)),
        ("achieved_resolution", repr(float(r.achieved_resolution))),
        ("kept_features", ",".join(r.kept_features)),
    ]
    return "".join(f"{k} = {v}\n" for k, v in items)


def parse_kv(text: str) -> dict[str, str]:
    out = {}
    for lineno, line in enumerate(text.splitlines(), start=1):
        if not line.strip():
            continue
        key, sep, value = line.partition(" = ")
        if not sep:
            raise ValueError(f"line {lineno}: expected 'key = value'")
        out[key.strip()] = value.strip()
    return out


def _float_list(s: str) -> list[float]:
    return [float(v) for v in s.split(",")] if s else []


def _int_list(s: str) -> list[int]:
    return [int(v) for v in s.split(",")] if s else []


def report_from_kv(text: str, reduced_dataset: Dataset | None = None) -> DecisionReport:
    kv = parse_kv(text)
    target = None if kv["target_resolution"] == "auto" else float(kv["target_resolution"])

    def cut(prefix):
        scores = tuple(
            CutScore(p, lam, gap) for p, lam, gap in zip(
                _int_list(kv[f"{prefix}_cut_positions"]),
                _float_list(kv[f"{prefix}_cut_lambda"]),
                _float_list(kv[f"{prefix}_cut_weighted_gap"]),
            )
        )
        return CutDecision(int(kv[f"{prefix}_n_kept"]), float(kv[f"{prefix}_resolution"]),
                           target, scores)

    ptype = ProblemType.parse(kv["problem_type"])
    kind = ScoreKind.ACCURACY if ptype is ProblemType.CLASSIFICATION else ScoreKind.R2

    def cv(prefix):
        return CvResult(tuple(_float_list(kv[f"mlp_fold_scores_{prefix}"])), kind,
                        tuple(_int_list(kv[f"mlp_epochs_{prefix}"])))

    pca_scores = np.array(_float_list(kv["pca_importance"]))
    return DecisionReport(
        problem_type=ptype,
        feature_names=tuple(kv["feature_names"].split(",")),
        n_rows=int(kv["n_rows"]),
        rf_importance=ImportanceVector(_float_list(kv["rf_importance"]),
                                       _int_list(kv["rf_order"]), Source.FOREST),
        pca_importance=ImportanceVector(pca_scores, np.arange(pca_scores.size), Source.PCA),
        selection_cut=cut("selection"),
        extraction_cut=cut("extraction"),
        selection_cv=cv("selection"),
        extraction_cv=cv("extraction"),
        interpretability_weight=float(kv["interpretability_weight"]),
        integrity_weight=float(kv["integrity_weight"]),
        interpretability_score=float(kv["interpretability_score"]),
        integrity_score=float(kv["integrity_score"]),
        chosen_method=Method(kv["chosen_method"]),
        target_resolution=target,
        use_best_fold=kv["score_mode"] == "best",
        reduced_dataset=reduced_dataset,
    )


def importance_csv(report: DecisionReport, source: Source) -> str:
    """Ranked importance series with cumulative resolution and a kept flag."""
    if source is Source.FOREST:
        imp, c = report.rf_importance, report.selection_cut
        names = [report.feature_names[i] for i in imp.order]
    else:
        imp, c = report.pca_importance, report.extraction_cut
        names = list(pca.component_names(len(imp.scores)))
    lines = ["rank,name,importance,cumulative,kept"]
    cum = 0.0
    for rank, (name, v) in enumerate(zip(names, imp.sorted_scores), start=1):
        cum += v
        lines.append(f"{rank},{name},{v!r},{cum!r},{int(rank <= c.n_kept)}")
    return "\n".join(lines) + "\n"


def cut_scores_csv(report: DecisionReport) -> str:
    lines = ["pipeline,cut_position,resolution,weighted_gap,total"]
    for label, c in (("selection", report.selection_cut), ("extraction", report.extraction_cut)):
        for s in c.scores:
            lines.append(f"{label},{s.position},{s.resolution!r},{s.weighted_gap!r},{s.total!r}")
    return "\n".join(lines) + "\n"
