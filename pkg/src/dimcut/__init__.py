"""Feature selection vs. feature extraction, decided from MLP cross-validation."""
from .decision import (
    DecisionReport,
    Method,
    PipelineConfig,
    decide,
    render_report,
    report_from_kv,
    report_to_kv,
    run_pipeline,
)
from .forest import ForestConfig, ImportanceVector, MaxFeatures, feature_importance, fit_forest
from .mlp import CvResult, MlpConfig, evaluate, gradient_check
from .pca import fit_pca, pca_importance, project
from .resolution import CutDecision, auto_cut, prune_tail, select_by_target
from .tabular import Dataset, ProblemType, SynthSpec, generate, load_csv, save_csv
from .validate import run_validation

__all__ = [
    "CutDecision", "CvResult", "Dataset", "DecisionReport", "ForestConfig", "ImportanceVector",
    "MaxFeatures", "Method", "MlpConfig", "PipelineConfig", "ProblemType", "SynthSpec",
    "auto_cut", "decide", "evaluate", "feature_importance", "fit_forest", "fit_pca",
    "generate", "gradient_check", "load_csv", "pca_importance", "project", "prune_tail",
    "render_report", "report_from_kv", "report_to_kv", "run_pipeline", "run_validation",
    "save_csv", "select_by_target",
]
