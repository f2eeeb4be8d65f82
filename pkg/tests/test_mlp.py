import numpy as np
import pytest

from dimcut.mlp import (
    Activation,
    CvResult,
    DivergenceError,
    MlpConfig,
    ScoreKind,
    evaluate,
    fold_ids,
    gradient_check,
    gradients,
    hidden_units,
    init_params,
    sgd_epoch,
    standardize,
)
from dimcut.tabular import Dataset, ProblemType, SynthSpec, make_regression

REG = ProblemType.REGRESSION
CLS = ProblemType.CLASSIFICATION


def ds(X, y, kind):
    X = np.asarray(X, dtype=float)
    return Dataset(tuple(f"f{i}" for i in range(X.shape[1])), X, y, kind)


@pytest.fixture
def reg_probe():
    g = np.random.default_rng(0)
    X = g.standard_normal((12, 3))
    return ds(X, X @ [1.0, -2.0, 0.5] + 0.1 * g.standard_normal(12), REG)


@pytest.fixture
def cls_probe():
    g = np.random.default_rng(1)
    return ds(g.standard_normal((15, 4)), np.arange(15) % 3, CLS)


@pytest.mark.parametrize("activation", list(Activation))
def test_gradient_check_regression(reg_probe, activation):
    assert gradient_check(MlpConfig(activation=activation, seed=3), reg_probe) <= 1e-5


@pytest.mark.parametrize("activation", list(Activation))
def test_gradient_check_classification(cls_probe, activation):
    assert gradient_check(MlpConfig(activation=activation, seed=4), cls_probe) <= 1e-5


@pytest.mark.parametrize("probe", ["reg_probe", "cls_probe"])
def test_gradient_check_zero_init_tanh(request, probe):
    d = request.getfixturevalue(probe)
    assert gradient_check(MlpConfig(activation=Activation.TANH), d, zero_init=True) <= 1e-5


def test_gradient_check_probe_size(reg_probe):
    big = ds(np.zeros((21, 2)) + np.arange(21)[:, None], np.arange(21.0), REG)
    with pytest.raises(ValueError):
        gradient_check(MlpConfig(), big)


@pytest.mark.parametrize("classification", [False, True])
@pytest.mark.parametrize("activation", list(Activation))
def test_compiled_epoch_matches_numpy_backprop(classification, activation):
    g = np.random.default_rng(7)
    X = g.standard_normal((70, 4))
    Y = np.eye(3)[g.integers(0, 3, 70)] if classification else g.standard_normal((70, 1))
    p = init_params(4, 5, Y.shape[1], g)
    q = [a.copy() for a in p]
    order = g.permutation(70)
    sgd_epoch(*p, X, Y, order, 32, 0.05, classification, activation is Activation.RELU)
    for s in range(0, 70, 32):
        b = order[s:s + 32]
        for a, gr in zip(q, gradients(q, X[b], Y[b], classification, activation)):
            a -= 0.05 * gr
    for a, b in zip(p, q):
        assert np.max(np.abs(a - b)) <= 1e-12


def test_hidden_units_rounding():
    assert hidden_units(5) == 6
    assert hidden_units(1) == 2  # floor of 2 units
    assert hidden_units(25) == 30
    assert hidden_units(10, 1.25) == 12  # 12.5 rounds half to even


def test_defaults_follow_architecture_table():
    c = MlpConfig()
    assert (c.learning_rate, c.tol, c.max_epochs, c.k_folds, c.hidden_multiplier) == (
        0.001, 0.0001, 100_000, 10, 1.2)


def test_noiseless_linear_single_feature():
    d = make_regression(SynthSpec(REG, 500, 1, noise_scale=0.0, seed=1))
    res = evaluate(d)
    assert res.score_kind is ScoreKind.R2
    assert res.mean_score >= 0.99


def test_separated_gaussians():
    g = np.random.default_rng(5)
    y = np.arange(500) % 2
    centers = np.array([[0.0, 0.0], [6 / np.sqrt(2), 6 / np.sqrt(2)]])
    X = centers[y] + g.standard_normal((500, 2))
    res = evaluate(ds(X, y, CLS))
    assert res.score_kind is ScoreKind.ACCURACY
    assert res.mean_score >= 0.95
    assert all(0 <= s <= 1 for s in res.fold_scores)


def test_constant_target_scores_zero():
    X = np.random.default_rng(0).standard_normal((40, 2))
    res = evaluate(ds(X, np.full(40, 3.0), REG), MlpConfig(k_folds=4, max_epochs=50))
    assert res.fold_scores == (0.0,) * 4


def test_deterministic_fold_scores():
    d = make_regression(SynthSpec(REG, 120, 3, seed=2))
    cfg = MlpConfig(k_folds=3, seed=11)
    a, b = evaluate(d, cfg), evaluate(d, cfg)
    assert a.fold_scores == b.fold_scores
    assert a.epochs_run == b.epochs_run


def test_beats_mean_predictor_in_every_fold():
    d = make_regression(SynthSpec(REG, 300, 2, noise_scale=0.0, seed=3))
    res = evaluate(d)
    # the training-fold mean predictor scores <= 0 on held-out data by construction of R^2
    assert all(s > 0.5 for s in res.fold_scores)


def test_mean_score_is_fold_mean():
    r = CvResult((0.5, 0.7, 0.9), ScoreKind.ACCURACY, (1, 2, 3))
    assert abs(r.mean_score - 0.7) <= 1e-12
    assert r.best_score == 0.9


def test_standardization_uses_training_rows_only():
    g = np.random.default_rng(0)
    X = g.standard_normal((100, 2))
    d = ds(X, X[:, 0].copy(), REG)
    ids = fold_ids(d, 5, 1)
    train = ids != 0
    mu, sd = standardize(X[train])
    shifted = X.copy()
    shifted[~train] += 1000.0
    mu2, sd2 = standardize(shifted[train])
    assert np.array_equal(mu, mu2) and np.array_equal(sd, sd2)


def test_stratified_folds_cover_classes():
    y = np.array([0] * 30 + [1] * 12 + [2] * 5)
    d = ds(np.random.default_rng(1).standard_normal((47, 2)), y, CLS)
    ids = fold_ids(d, 10, 3)
    for k in range(10):
        assert set(y[ids != k]) == {0, 1, 2}
    sizes = np.bincount(ids)
    assert sizes.max() - sizes.min() <= 1


def test_fold_missing_class_is_an_error():
    y = np.array([0] * 20 + [1])
    d = ds(np.random.default_rng(1).standard_normal((21, 2)), y, CLS)
    with pytest.raises(ValueError, match="class 1"):
        evaluate(d, MlpConfig(k_folds=3))


def test_too_few_rows():
    d = ds(np.arange(10.0)[:, None], np.arange(10.0), REG)
    with pytest.raises(ValueError):
        evaluate(d, MlpConfig(k_folds=11))


def test_divergence_reports_epoch():
    g = np.random.default_rng(0)
    X = g.standard_normal((60, 2))
    d = ds(X, X @ [3.0, 1.0], REG)
    with pytest.raises(DivergenceError) as info:
        evaluate(d, MlpConfig(learning_rate=1e3, k_folds=3))
    assert info.value.epoch >= 1
    assert "epoch" in str(info.value)


def test_config_validation():
    with pytest.raises(ValueError):
        MlpConfig(k_folds=1)
    with pytest.raises(ValueError):
        MlpConfig(learning_rate=0)
