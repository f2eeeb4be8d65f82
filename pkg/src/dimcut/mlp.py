"""One-hidden-layer MLP trained by mini-batch SGD, scored with k-fold CV."""
from __future__ import annotations

import enum
from dataclasses import dataclass

import numba
import numpy as np

from .tabular import Dataset, ProblemType, rng

PATIENCE = 10
VALIDATION_FRACTION = 0.1
MAX_RESTARTS = 3
RESTART_RATIO = 0.9


class Activation(enum.Enum):
    RELU = "relu"
    TANH = "tanh"


class DivergenceError(RuntimeError):
    def __init__(self, epoch: int, fold: int | None = None):
        where = f" in fold {fold}" if fold is not None else ""
        super().__init__(f"training diverged (non-finite loss) at epoch {epoch}{where}")
        self.epoch = epoch
        self.fold = fold


@dataclass(frozen=True)
class MlpConfig:
    learning_rate: float = 0.001
    tol: float = 0.0001
    max_epochs: int = 100_000
    k_folds: int = 10
    hidden_multiplier: float = 1.2
    batch_size: int = 32
    seed: int = 1
    activation: Activation = Activation.RELU

    def __post_init__(self):
        object.__setattr__(self, "activation", Activation(self.activation))
        if self.learning_rate <= 0 or self.tol <= 0:
            raise ValueError("learning_rate and tol must be positive")
        if self.max_epochs < 1 or self.batch_size < 1:
            raise ValueError("max_epochs and batch_size must be positive")
        if self.k_folds < 2:
            raise ValueError("k_folds must be >= 2")
        if self.hidden_multiplier <= 0:
            raise ValueError("hidden_multiplier must be positive")


def hidden_units(n_inputs: int, multiplier: float = 1.2) -> int:
    return max(2, round(multiplier * n_inputs))


class ScoreKind(enum.Enum):
    R2 = "r2"
    ACCURACY = "accuracy"


@dataclass(frozen=True)
class CvResult:
    fold_scores: tuple[float, ...]
    score_kind: ScoreKind
    epochs_run: tuple[int, ...]

    @property
    def mean_score(self) -> float:
        return float(np.mean(self.fold_scores))

    @property
    def best_score(self) -> float:
        return float(max(self.fold_scores))


# --- network ---------------------------------------------------------------

def init_params(n_in: int, n_hidden: int, n_out: int, g: np.random.Generator) -> list[np.ndarray]:
    """He-style normal init scaled by fan-in; zero biases."""
    return [
        g.standard_normal((n_in, n_hidden)) * np.sqrt(2.0 / n_in),
        np.zeros(n_hidden),
        g.standard_normal((n_hidden, n_out)) * np.sqrt(2.0 / n_hidden),
        np.zeros(n_out),
    ]


def _forward(params, X, activation):
    W1, b1, W2, b2 = params
    z = X @ W1 + b1
    h = np.maximum(z, 0.0) if activation is Activation.RELU else np.tanh(z)
    return z, h, h @ W2 + b2


def _softmax(logits):
    e = np.exp(logits - logits.max(axis=1, keepdims=True))
    return e / e.sum(axis=1, keepdims=True)


def loss(params, X, Y, classification: bool, activation: Activation) -> float:
    """MSE for regression; mean cross-entropy for one-hot ``Y`` otherwise."""
    with np.errstate(over="ignore", invalid="ignore"):
        _, _, out = _forward(params, X, activation)
    if classification:
        logits = out - out.max(axis=1, keepdims=True)
        logp = logits - np.log(np.exp(logits).sum(axis=1, keepdims=True))
        return float(-np.sum(Y * logp) / X.shape[0])
    with np.errstate(over="ignore", invalid="ignore"):
        return float(np.mean((out - Y) ** 2))


def gradients(params, X, Y, classification: bool, activation: Activation):
    W1, b1, W2, b2 = params
    z, h, out = _forward(params, X, activation)
    m = X.shape[0]
    if classification:
        d_out = (_softmax(out) - Y) / m
    else:
        d_out = 2.0 * (out - Y) / (m * Y.shape[1])
    gW2 = h.T @ d_out
    gb2 = d_out.sum(axis=0)
    dh = d_out @ W2.T
    dz = dh * (z > 0) if activation is Activation.RELU else dh * (1.0 - h * h)
    gW1 = X.T @ dz
    gb1 = dz.sum(axis=0)
    return [gW1, gb1, gW2, gb2]



@numba.njit(cache=True, nogil=True)
def sgd_epoch(W1, b1, W2, b2, X, Y, order, batch_size, lr, classification, relu):
    """One pass of mini-batch SGD over ``order``, updating parameters in place.

    Same arithmetic as :func:`gradients` followed by ``p -= lr * g``.
    """
    n_in, n_hid = W1.shape
    n_out = W2.shape[1]
    n = order.size
    z = np.empty((batch_size, n_hid))
    h = np.empty((batch_size, n_hid))
    d_out = np.empty((batch_size, n_out))
    dz = np.empty((batch_size, n_hid))
    gW1 = np.empty((n_in, n_hid))
    gb1 = np.empty(n_hid)
    gW2 = np.empty((n_hid, n_out))
    gb2 = np.empty(n_out)
    for start in range(0, n, batch_size):
        m = min(batch_size, n - start)
        for r in range(m):
            row = order[start + r]
            for j in range(n_hid):
                acc = b1[j]
                for i in range(n_in):
                    acc += X[row, i] * W1[i, j]
                z[r, j] = acc
                if relu:
                    h[r, j] = acc if acc > 0.0 else 0.0
                else:
                    h[r, j] = np.tanh(acc)
            for k in range(n_out):
                acc = b2[k]
                for j in range(n_hid):
                    acc += h[r, j] * W2[j, k]
                d_out[r, k] = acc
            if classification:
                mx = d_out[r, 0]
                for k in range(1, n_out):
                    mx = max(mx, d_out[r, k])
                tot = 0.0
                for k in range(n_out):
                    d_out[r, k] = np.exp(d_out[r, k] - mx)
                    tot += d_out[r, k]
                for k in range(n_out):
                    d_out[r, k] = (d_out[r, k] / tot - Y[row, k]) / m
            else:
                for k in range(n_out):
                    d_out[r, k] = 2.0 * (d_out[r, k] - Y[row, k]) / (m * n_out)
        gW2[:, :] = 0.0
        gb2[:] = 0.0
        gW1[:, :] = 0.0
        gb1[:] = 0.0
        for r in range(m):
            row = order[start + r]
            for k in range(n_out):
                gb2[k] += d_out[r, k]
                for j in range(n_hid):
                    gW2[j, k] += h[r, j] * d_out[r, k]
            for j in range(n_hid):
                acc = 0.0
                for k in range(n_out):
                    acc += d_out[r, k] * W2[j, k]
                if relu:
                    dz[r, j] = acc if z[r, j] > 0.0 else 0.0
                else:
                    dz[r, j] = acc * (1.0 - h[r, j] * h[r, j])
                gb1[j] += dz[r, j]
                for i in range(n_in):
                    gW1[i, j] += X[row, i] * dz[r, j]
        for i in range(n_in):
            for j in range(n_hid):
                W1[i, j] -= lr * gW1[i, j]
        for j in range(n_hid):
            b1[j] -= lr * gb1[j]
            for k in range(n_out):
                W2[j, k] -= lr * gW2[j, k]
        for k in range(n_out):
            b2[k] -= lr * gb2[k]


def predict(params, X, classification: bool, activation: Activation) -> np.ndarray:
    _, _, out = _forward(params, X, activation)
    return np.argmax(out, axis=1) if classification else out[:, 0]


def _encode(y, classification: bool, n_classes: int) -> np.ndarray:
    if classification:
        return np.eye(n_classes)[y]
    return np.asarray(y, dtype=np.float64).reshape(-1, 1)


def _baseline_loss(Yf, Yv, classification: bool) -> float:
    """Validation loss of the constant predictor fitted on the training slice."""
    mean = Yf.mean(axis=0)
    if classification:
        return float(-np.sum(Yv * np.log(np.clip(mean, 1e-12, None))) / Yv.shape[0])
    return float(np.mean((Yv - mean) ** 2))


def _fit_once(Xf, Yf, Xv, Yv, config, g, classification, fold):
    params = init_params(Xf.shape[1], hidden_units(Xf.shape[1], config.hidden_multiplier),
                         Yf.shape[1], g)
    act = config.activation
    lr = config.learning_rate
    bs = config.batch_size
    relu = act is Activation.RELU
    Xf = np.ascontiguousarray(Xf)
    Yf = np.ascontiguousarray(Yf)
    best = np.inf
    reference = np.inf  # loss at the last improvement of at least tol
    best_params = [p.copy() for p in params]
    stale = 0
    epoch = 0
    for epoch in range(1, config.max_epochs + 1):
        order = g.permutation(Xf.shape[0])
        sgd_epoch(*params, Xf, Yf, order, bs, lr, classification, relu)
        current = loss(params, Xv, Yv, classification, act)
        if not np.isfinite(current):
            raise DivergenceError(epoch, fold)
        if current < reference - config.tol:
            reference = current
            stale = 0
        else:
            stale += 1
        if current < best:
            best = current
            best_params = [p.copy() for p in params]
        if stale >= PATIENCE:
            break
    z = Xf @ best_params[0] + best_params[1]
    dead = float(np.mean(np.all(z <= 0, axis=0))) if act is Activation.RELU else 0.0
    return best_params, epoch, best, dead


def train(X, Y, config: MlpConfig, g: np.random.Generator, *, classification: bool,
          fold: int | None = None):
    """Fit on (X, Y) holding out a slice for early stopping; returns (params, epochs).

    A run that fails to beat the constant predictor, or ends with half or more of
    its ReLU units dead on the training rows, is restarted from a fresh draw at
    most MAX_RESTARTS times; the best attempt by validation loss is kept.
    """
    n = X.shape[0]
    perm = g.permutation(n)
    n_val = int(round(VALIDATION_FRACTION * n)) if n >= 20 else 0
    val, fit = perm[:n_val], perm[n_val:]
    if n_val == 0:
        val = fit
    Xf, Yf, Xv, Yv = X[fit], Y[fit], X[val], Y[val]
    baseline = _baseline_loss(Yf, Yv, classification)
    best = None
    total_epochs = 0
    for _ in range(MAX_RESTARTS + 1):
        params, epochs, value, dead = _fit_once(Xf, Yf, Xv, Yv, config, g, classification, fold)
        total_epochs += epochs
        if best is None or value < best[1]:
            best = (params, value)
        if value < RESTART_RATIO * baseline and dead < 0.5:
            break
    return best[0], total_epochs


def r2_score(y, pred) -> float:
    y = np.asarray(y, dtype=np.float64)
    ss_tot = np.sum((y - y.mean()) ** 2)
    if ss_tot == 0:
        return 0.0
    return float(1.0 - np.sum((y - pred) ** 2) / ss_tot)


def fold_ids(dataset: Dataset, k: int, seed: int) -> np.ndarray:
    """Fold index per row; stratified by class for classification."""
    n = dataset.n_rows
    if n < k:
        raise ValueError(f"need at least {k} rows for {k}-fold CV, got {n}")
    g = rng(seed, 0xF01D)
    ids = np.empty(n, dtype=np.int64)
    if dataset.problem_type is ProblemType.CLASSIFICATION:
        counts = np.bincount(dataset.target)
        if counts.min() < 2:
            raise ValueError(
                f"class {int(np.argmin(counts))} has fewer than 2 rows; some training fold would miss it"
            )
        offset = 0
        for c in range(counts.size):
            members = np.flatnonzero(dataset.target == c)
            members = members[g.permutation(members.size)]
            ids[members] = (offset + np.arange(members.size)) % k
            offset = (offset + members.size) % k
    else:
        ids[g.permutation(n)] = np.arange(n) % k
    return ids


def standardize(train_X: np.ndarray):
    mu = train_X.mean(axis=0)
    sd = train_X.std(axis=0)
    sd = np.where(sd > 0, sd, 1.0)
    return mu, sd


def evaluate(dataset: Dataset, config: MlpConfig = MlpConfig()) -> CvResult:
    classification = dataset.problem_type is ProblemType.CLASSIFICATION
    k = config.k_folds
    ids = fold_ids(dataset, k, config.seed)
    X = dataset.features
    y = dataset.target
    n_classes = dataset.n_classes
    scores, epochs = [], []
    for fold in range(k):
        test = ids == fold
        tr = ~test
        if classification and np.unique(y[tr]).size != n_classes:
            raise ValueError(f"fold {fold}: training split is missing a class")
        mu, sd = standardize(X[tr])
        Xtr, Xte = (X[tr] - mu) / sd, (X[test] - mu) / sd
        if classification:
            Ytr = _encode(y[tr], True, n_classes)
        else:
            ymu, ysd = standardize(y[tr].reshape(-1, 1))
            Ytr = (y[tr].reshape(-1, 1) - ymu) / ysd
        params, ep = train(Xtr, Ytr, config, rng(config.seed, fold),
                           classification=classification, fold=fold)
        pred = predict(params, Xte, classification, config.activation)
        if classification:
            scores.append(float(np.mean(pred == y[test])))
        else:
            scores.append(r2_score(y[test], pred * ysd[0] + ymu[0]))
        epochs.append(ep)
    kind = ScoreKind.ACCURACY if classification else ScoreKind.R2
    return CvResult(tuple(scores), kind, tuple(epochs))


def gradient_check(config: MlpConfig, probe: Dataset, *, zero_init: bool = False,
                   step: float = 1e-5) -> float:
    """Max relative error between backprop and central differences over all weights."""
    if probe.n_rows > 20 or probe.n_features > 5:
        raise ValueError("probe must have at most 20 rows and 5 features")
    classification = probe.problem_type is ProblemType.CLASSIFICATION
    X = probe.features
    Y = _encode(probe.target, classification, probe.n_classes)
    g = rng(config.seed, 0x6C)
    params = init_params(X.shape[1], hidden_units(X.shape[1], config.hidden_multiplier),
                         Y.shape[1], g)
    if zero_init:
        params = [np.zeros_like(p) for p in params]
    act = config.activation
    analytic = gradients(params, X, Y, classification, act)
    worst = 0.0
    for p, a in zip(params, analytic):
        for i in np.ndindex(p.shape):
            orig = p[i]
            p[i] = orig + step
            up = loss(params, X, Y, classification, act)
            p[i] = orig - step
            down = loss(params, X, Y, classification, act)
            p[i] = orig
            num = (up - down) / (2 * step)
            denom = max(abs(num) + abs(a[i]), 1e-8)
            worst = max(worst, abs(num - a[i]) / denom)
    return worst
