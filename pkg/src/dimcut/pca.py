"""Covariance PCA: explained-variance importance and projection."""
from __future__ import annotations

from dataclasses import dataclass

import numpy as np

from .forest import ImportanceVector, Source
from .tabular import Dataset


@dataclass(frozen=True, eq=False)
class PcaModel:
    mean: np.ndarray
    components: np.ndarray  # columns are principal axes
    explained_variance: np.ndarray
    explained_variance_ratio: np.ndarray
    scale: np.ndarray | None = None

    @property
    def n_features(self) -> int:
        return self.mean.size

    def transform(self, X: np.ndarray, n_components: int | None = None) -> np.ndarray:
        Z = np.asarray(X, dtype=np.float64) - self.mean
        if self.scale is not None:
            Z = Z / self.scale
        W = self.components if n_components is None else self.components[:, :n_components]
        return Z @ W


def fit_pca(dataset: Dataset, standardize: bool = False) -> PcaModel:
    """Fit on the feature matrix only; the target column plays no part."""
    X = dataset.features
    if X.shape[0] < 2:
        raise ValueError("PCA needs at least 2 rows")
    if not np.all(np.isfinite(X)):
        raise ValueError("PCA input contains non-finite values")
    mean = X.mean(axis=0)
    Z = X - mean
    scale = None
    if standardize:
        scale = Z.std(axis=0, ddof=1)
        scale[scale == 0] = 1.0
        Z = Z / scale
    cov = (Z.T @ Z) / (X.shape[0] - 1)
    evals, evecs = np.linalg.eigh(cov)
    order = np.argsort(-evals, kind="stable")
    evals = np.clip(evals[order], 0.0, None)
    evecs = evecs[:, order]
    # largest-magnitude loading of each axis is made positive
    pivot = np.argmax(np.abs(evecs), axis=0)
    signs = np.sign(evecs[pivot, np.arange(evecs.shape[1])])
    signs[signs == 0] = 1.0
    evecs = evecs * signs
    total = evals.sum()
    if not total > 0:
        raise ValueError("features have zero total variance")
    ratio = evals / total
    return PcaModel(mean, evecs, evals, ratio, scale)


def pca_importance(model: PcaModel) -> ImportanceVector:
    r = model.explained_variance_ratio
    return ImportanceVector(r / r.sum(), np.arange(r.size), Source.PCA)


def component_names(n: int) -> tuple[str, ...]:
    return tuple(f"PC{i + 1}" for i in range(n))


def project(model: PcaModel, dataset: Dataset, n_components: int) -> Dataset:
    if not 1 <= n_components <= model.n_features:
        raise ValueError(f"n_components must be in [1, {model.n_features}], got {n_components}")
    if dataset.n_features != model.n_features:
        raise ValueError("dataset does not match the fitted PCA model")
    scores = model.transform(dataset.features, n_components)
    return dataset.with_features(scores, component_names(n_components))
