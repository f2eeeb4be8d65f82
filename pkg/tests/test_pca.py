import numpy as np
import pytest
from hypothesis import given, settings
from hypothesis import strategies as st
from hypothesis.extra.numpy import arrays

from dimcut.pca import fit_pca, pca_importance, project
from dimcut.tabular import Dataset, ProblemType, SynthSpec, make_classification

REG = ProblemType.REGRESSION


def ds(X, y=None):
    X = np.asarray(X, dtype=float)
    y = np.arange(X.shape[0], dtype=float) if y is None else y
    return Dataset(tuple(f"f{i}" for i in range(X.shape[1])), X, y, REG)


@pytest.fixture
def rank_one():
    x = np.random.default_rng(3).standard_normal(200)
    return ds(np.column_stack([x, 2 * x]))


def test_rank_one_ratios(rank_one):
    m = fit_pca(rank_one)
    assert np.allclose(m.explained_variance_ratio, [1.0, 0.0], atol=1e-9)
    imp = pca_importance(m)
    assert np.allclose(imp.scores, [1.0, 0.0], atol=1e-9)
    assert imp.order.tolist() == [0, 1]


@pytest.mark.parametrize("seed", range(5))
def test_isotropic_ratios(seed):
    X = np.random.default_rng(seed).standard_normal((10_000, 2))
    r = fit_pca(ds(X)).explained_variance_ratio
    assert np.all((0.45 <= r) & (r <= 0.55))


def test_full_reconstruction():
    X = np.random.default_rng(0).standard_normal((300, 4)) @ np.diag([3, 1, 0.5, 2.0])
    m = fit_pca(ds(X))
    scores = project(m, ds(X), 4).features
    assert np.max(np.abs(scores @ m.components.T - (X - X.mean(0)))) <= 1e-8


def test_wide_classification_importance():
    d = make_classification(SynthSpec(ProblemType.CLASSIFICATION, 500, 25, seed=1))
    imp = pca_importance(fit_pca(d))
    assert imp.scores.size == 25
    assert np.all(np.diff(imp.scores) <= 0)
    assert abs(imp.scores.sum() - 1) <= 1e-9


def test_full_projection_variance():
    X = np.random.default_rng(1).standard_normal((400, 3)) * [1.0, 4.0, 2.0]
    m = fit_pca(ds(X))
    P = project(m, ds(X), 3)
    assert np.allclose(P.features.var(axis=0, ddof=1), m.explained_variance, atol=1e-8)
    assert P.feature_names == ("PC1", "PC2", "PC3")


def test_rank_one_single_component(rank_one):
    m = fit_pca(rank_one)
    P = project(m, rank_one, 1)
    total = rank_one.features.var(axis=0, ddof=1).sum()
    assert abs(P.features[:, 0].var(ddof=1) - total) <= 1e-9


def test_projection_keeps_rows_and_target(rank_one):
    P = project(fit_pca(rank_one), rank_one, 1)
    assert P.n_rows == rank_one.n_rows
    assert np.array_equal(P.target, rank_one.target)


@pytest.mark.parametrize("k", [0, 3])
def test_projection_range(rank_one, k):
    with pytest.raises(ValueError):
        project(fit_pca(rank_one), rank_one, k)


def test_rotational_recovery():
    g = np.random.default_rng(11)
    X = g.standard_normal((10_000, 3)) * [5.0, 1.0, 1.0]
    theta = 0.7
    R = np.array([[np.cos(theta), -np.sin(theta), 0], [np.sin(theta), np.cos(theta), 0], [0, 0, 1]])
    m = fit_pca(ds(X @ R.T))
    axis = R @ np.array([1.0, 0.0, 0.0])
    assert abs(axis @ m.components[:, 0]) >= 0.99


def test_target_not_used():
    X = np.random.default_rng(2).standard_normal((50, 3))
    a = fit_pca(ds(X, np.zeros(50)))
    b = fit_pca(ds(X, np.arange(50.0) ** 3))
    assert np.array_equal(a.components, b.components)


def test_standardize_flag():
    X = np.random.default_rng(4).standard_normal((2000, 2)) * [100.0, 1.0]
    assert fit_pca(ds(X)).explained_variance_ratio[0] > 0.99
    r = fit_pca(ds(X), standardize=True).explained_variance_ratio
    assert 0.4 < r[1] <= r[0] < 0.6


matrices = arrays(np.float64, st.tuples(st.integers(3, 30), st.integers(1, 6)),
                  elements=st.floats(-100, 100))


@settings(max_examples=60, deadline=None)
@given(X=matrices)
def test_pca_invariants(X):
    if np.all(X.var(axis=0) == 0):
        return
    m = fit_pca(ds(X))
    C = m.components
    assert np.max(np.abs(C.T @ C - np.eye(C.shape[1]))) <= 1e-8
    assert np.all(np.diff(m.explained_variance) <= 1e-12 * max(1.0, m.explained_variance[0]))
    assert abs(m.explained_variance_ratio.sum() - 1) <= 1e-9
    pivot = np.argmax(np.abs(C), axis=0)
    assert np.all(C[pivot, np.arange(C.shape[1])] > 0)
    if X.shape[1] >= 2:
        P = project(m, ds(X), 2).features
        assert P[:, 0].var() >= P[:, 1].var() - 1e-9 * max(1.0, P[:, 0].var())


def test_fit_errors():
    with pytest.raises(ValueError):
        fit_pca(ds(np.ones((5, 2))))
