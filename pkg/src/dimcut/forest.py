"""Random forest (bagged CART) and mean-decrease-in-impurity importance."""
from __future__ import annotations

import enum
import os
from concurrent.futures import ThreadPoolExecutor
from dataclasses import dataclass

import numba
import numpy as np

from .tabular import Dataset, ProblemType, rng


class Source(enum.Enum):
    FOREST = "forest"
    PCA = "pca"


@dataclass(frozen=True, eq=False)
class ImportanceVector:
    """Normalized importances plus the descending order over original features.

    ``order`` may be a strict prefix of the full permutation after tail pruning;
    scores are never renormalized.
    """

    scores: np.ndarray
    order: np.ndarray
    source: Source

    def __post_init__(self):
        s = np.array(self.scores, dtype=np.float64)
        o = np.array(self.order, dtype=np.int64)
        if s.ndim != 1 or s.size == 0:
            raise ValueError("importance scores must be a nonempty vector")
        if np.any(s < 0) or not np.all(np.isfinite(s)):
            raise ValueError("importance scores must be finite and nonnegative")
        if abs(s.sum() - 1.0) > 1e-9:
            raise ValueError(f"importance scores must sum to 1, got {s.sum()!r}")
        if o.size == 0 or o.size > s.size or len(set(o.tolist())) != o.size:
            raise ValueError("order must be a nonempty prefix of a permutation")
        if o.min() < 0 or o.max() >= s.size:
            raise ValueError("order indexes out of range")
        if np.any(np.diff(s[o]) > 0):
            raise ValueError("order must sort scores in descending order")
        s.setflags(write=False)
        o.setflags(write=False)
        object.__setattr__(self, "scores", s)
        object.__setattr__(self, "order", o)

    @classmethod
    def from_scores(cls, scores, source: Source) -> "ImportanceVector":
        s = np.asarray(scores, dtype=np.float64)
        # stable sort on -s keeps the lower original index first among ties
        return cls(s, np.argsort(-s, kind="stable"), source)

    @property
    def sorted_scores(self) -> np.ndarray:
        return self.scores[self.order]

    def __len__(self) -> int:
        return int(self.order.size)


class MaxFeatures:
    """Rule for how many candidate features each split examines."""

    def __init__(self, kind: str, fraction: float | None = None):
        if kind not in ("sqrt", "all", "fraction"):
            raise ValueError(f"unknown max_features rule {kind!r}")
        if kind == "fraction" and not (fraction is not None and 0 < fraction <= 1):
            raise ValueError("fraction must be in (0, 1]")
        self.kind = kind
        self.fraction = fraction

    SQRT: "MaxFeatures"
    ALL: "MaxFeatures"

    @classmethod
    def frac(cls, r: float) -> "MaxFeatures":
        return cls("fraction", r)

    def resolve(self, n_features: int) -> int:
        if self.kind == "all":
            return n_features
        if self.kind == "sqrt":
            k = int(np.sqrt(n_features))
        else:
            k = int(self.fraction * n_features)
        return min(n_features, max(1, k))

    def __eq__(self, other):
        return isinstance(other, MaxFeatures) and (self.kind, self.fraction) == (
            other.kind,
            other.fraction,
        )

    def __repr__(self):
        return f"MaxFeatures({self.kind!r}, {self.fraction!r})"


MaxFeatures.SQRT = MaxFeatures("sqrt")
MaxFeatures.ALL = MaxFeatures("all")


@dataclass(frozen=True)
class ForestConfig:
    n_trees: int = 100
    max_depth: int | None = None
    min_samples_split: int = 2
    max_features: MaxFeatures | None = None  # None: sqrt (classification), 1/3 (regression)
    seed: int = 1
    bootstrap: bool = True

    def __post_init__(self):
        if self.n_trees < 1:
            raise ValueError("n_trees must be >= 1")
        if self.max_depth is not None and self.max_depth < 1:
            raise ValueError("max_depth must be positive")
        if self.min_samples_split < 2:
            raise ValueError("min_samples_split must be >= 2")

    def features_per_split(self, problem_type: ProblemType, n_features: int) -> int:
        rule = self.max_features
        if rule is None:
            rule = MaxFeatures.SQRT if problem_type is ProblemType.CLASSIFICATION else MaxFeatures.frac(1 / 3)
        return rule.resolve(n_features)


# --- tree kernel ---------------------------------------------------------------

@numba.njit(cache=True, inline="always")
def _splitmix(state):
    state = state + np.uint64(0x9E3779B97F4A7C15)
    z = state
    z = (z ^ (z >> np.uint64(30))) * np.uint64(0xBF58476D1CE4E5B9)
    z = (z ^ (z >> np.uint64(27))) * np.uint64(0x94D049BB133111EB)
    return state, z ^ (z >> np.uint64(31))


@numba.njit(cache=True)
def _node_impurity(y, yc, idx, start, end, n_classes):
    m = end - start
    if n_classes > 0:
        counts = np.zeros(n_classes)
        for i in range(start, end):
            counts[yc[idx[i]]] += 1.0
        g = 1.0
        for c in range(n_classes):
            p = counts[c] / m
            g -= p * p
        return g
    s = 0.0
    for i in range(start, end):
        s += y[idx[i]]
    mu = s / m
    v = 0.0
    for i in range(start, end):
        d = y[idx[i]] - mu
        v += d * d
    return v / m


@numba.njit(cache=True, nogil=True)
def _grow(X, y, yc, n_classes, max_features, max_depth, min_split, seed, col_key):
    """Grow one CART tree on all rows of X (already bootstrapped).

    Near-equal gains are resolved by the smaller ``col_key``, a content hash of
    each column, so the grown tree does not depend on column order.
    Returns node arrays; leaves have feature == -1.
    """
    n, p = X.shape
    cap = 2 * n + 1
    feature = np.full(cap, -1, np.int64)
    threshold = np.zeros(cap)
    left = np.full(cap, -1, np.int64)
    right = np.full(cap, -1, np.int64)
    width = n_classes if n_classes > 0 else 1
    value = np.zeros((cap, width))
    importance = np.zeros(p)

    idx = np.arange(n)
    state = np.uint64(seed)
    feats = np.arange(p)

    # stack of (node, start, end, depth, impurity)
    st_node = np.zeros(cap, np.int64)
    st_start = np.zeros(cap, np.int64)
    st_end = np.zeros(cap, np.int64)
    st_depth = np.zeros(cap, np.int64)
    st_imp = np.zeros(cap)
    top = 0
    st_node[0] = 0
    st_start[0] = 0
    st_end[0] = n
    st_depth[0] = 0
    st_imp[0] = _node_impurity(y, yc, idx, 0, n, n_classes)
    top = 1
    n_nodes = 1

    xs = np.empty(n)
    ys = np.empty(n)
    ycs = np.empty(n, np.int64)
    lc = np.zeros(width)
    tc = np.zeros(width)

    while top > 0:
        top -= 1
        node = st_node[top]
        start = st_start[top]
        end = st_end[top]
        depth = st_depth[top]
        imp = st_imp[top]
        m = end - start
        tot_sum = 0.0
        lsum = 0.0
        lsq = 0.0
        tsq = 0.0

        if n_classes > 0:
            for c in range(n_classes):
                tc[c] = 0.0
            for i in range(start, end):
                tc[yc[idx[i]]] += 1.0
            for c in range(n_classes):
                value[node, c] = tc[c]
        else:
            s = 0.0
            for i in range(start, end):
                s += y[idx[i]]
            value[node, 0] = s / m
            tot_sum = s

        if m < min_split or imp <= 1e-14 or (max_depth > 0 and depth >= max_depth):
            continue

        best_gain = -1.0
        best_f = -1
        best_thr = 0.0
        best_pos = -1
        n_drawn = 0
        n_visited = 0
        # partial Fisher-Yates over features; keep drawing past constant features
        for j in range(p):
            feats[j] = j
        while n_visited < p and (n_drawn < max_features):
            state, r = _splitmix(state)
            pick = n_visited + np.int64(r % np.uint64(p - n_visited))
            tmp = feats[n_visited]
            feats[n_visited] = feats[pick]
            feats[pick] = tmp
            f = feats[n_visited]
            n_visited += 1

            for i in range(m):
                xs[i] = X[idx[start + i], f]
            order = np.argsort(xs[:m], kind="mergesort")
            if xs[order[0]] >= xs[order[m - 1]]:
                continue
            n_drawn += 1
            if n_classes > 0:
                for i in range(m):
                    ycs[i] = yc[idx[start + order[i]]]
                for c in range(n_classes):
                    lc[c] = 0.0
            else:
                for i in range(m):
                    ys[i] = y[idx[start + order[i]]]
                lsum = 0.0
                lsq = 0.0
                tsq = 0.0
                for i in range(m):
                    tsq += ys[i] * ys[i]
            for i in range(m - 1):
                nl = i + 1
                nr = m - nl
                if n_classes > 0:
                    lc[ycs[i]] += 1.0
                else:
                    lsum += ys[i]
                    lsq += ys[i] * ys[i]
                a = xs[order[i]]
                b = xs[order[i + 1]]
                if b <= a:
                    continue
                if n_classes > 0:
                    gl = 1.0
                    gr = 1.0
                    for c in range(n_classes):
                        pl = lc[c] / nl
                        pr = (tc[c] - lc[c]) / nr
                        gl -= pl * pl
                        gr -= pr * pr
                    child = (nl * gl + nr * gr) / m
                else:
                    rsum = tot_sum - lsum
                    rsq = tsq - lsq
                    vl = lsq / nl - (lsum / nl) ** 2
                    vr = rsq / nr - (rsum / nr) ** 2
                    if vl < 0.0:
                        vl = 0.0
                    if vr < 0.0:
                        vr = 0.0
                    child = (nl * vl + nr * vr) / m
                gain = imp - child
                tie = 1e-10 * imp
                if gain > best_gain + tie or (
                    gain > best_gain - tie and best_f >= 0 and f != best_f
                    and col_key[f] < col_key[best_f]
                ):
                    thr = 0.5 * (a + b)
                    if thr >= b:
                        thr = a
                    best_gain = gain
                    best_f = f
                    best_thr = thr
                    best_pos = i

        if best_f < 0:
            continue

        # partition idx[start:end] by the chosen split, stable
        nl = 0
        for i in range(m):
            if X[idx[start + i], best_f] <= best_thr:
                nl += 1
        buf_l = np.empty(nl, np.int64)
        buf_r = np.empty(m - nl, np.int64)
        a_ = 0
        b_ = 0
        for i in range(m):
            r_ = idx[start + i]
            if X[r_, best_f] <= best_thr:
                buf_l[a_] = r_
                a_ += 1
            else:
                buf_r[b_] = r_
                b_ += 1
        for i in range(nl):
            idx[start + i] = buf_l[i]
        for i in range(m - nl):
            idx[start + nl + i] = buf_r[i]

        imp_l = _node_impurity(y, yc, idx, start, start + nl, n_classes)
        imp_r = _node_impurity(y, yc, idx, start + nl, end, n_classes)
        importance[best_f] += (m * imp - nl * imp_l - (m - nl) * imp_r) / n

        feature[node] = best_f
        threshold[node] = best_thr
        li = n_nodes
        ri = n_nodes + 1
        n_nodes += 2
        left[node] = li
        right[node] = ri
        st_node[top] = ri
        st_start[top] = start + nl
        st_end[top] = end
        st_depth[top] = depth + 1
        st_imp[top] = imp_r
        top += 1
        st_node[top] = li
        st_start[top] = start
        st_end[top] = start + nl
        st_depth[top] = depth + 1
        st_imp[top] = imp_l
        top += 1

    return (
        feature[:n_nodes].copy(),
        threshold[:n_nodes].copy(),
        left[:n_nodes].copy(),
        right[:n_nodes].copy(),
        value[:n_nodes].copy(),
        importance,
    )


@numba.njit(cache=True, nogil=True)
def _apply(feature, threshold, left, right, X):
    out = np.empty(X.shape[0], np.int64)
    for i in range(X.shape[0]):
        node = 0
        while feature[node] >= 0:
            if X[i, feature[node]] <= threshold[node]:
                node = left[node]
            else:
                node = right[node]
        out[i] = node
    return out


@dataclass(frozen=True, eq=False)
class Tree:
    feature: np.ndarray
    threshold: np.ndarray
    left: np.ndarray
    right: np.ndarray
    value: np.ndarray
    importance: np.ndarray  # raw weighted impurity decrease per feature
    sample: np.ndarray  # bootstrap row indices

    @property
    def n_nodes(self) -> int:
        return int(self.feature.size)

    def leaf_values(self, X: np.ndarray) -> np.ndarray:
        return self.value[_apply(self.feature, self.threshold, self.left, self.right, X)]


def column_keys(X: np.ndarray) -> np.ndarray:
    """Order-free identity of each column: a multiplicative hash of its bit patterns."""
    bits = np.ascontiguousarray(X, dtype=np.float64).view(np.uint64)
    mult = (np.arange(bits.shape[0], dtype=np.uint64) * np.uint64(0x9E3779B97F4A7C15)) | np.uint64(1)
    with np.errstate(over="ignore"):
        h = (bits * mult[:, None]).sum(axis=0, dtype=np.uint64)
        h ^= h >> np.uint64(31)
        h *= np.uint64(0xBF58476D1CE4E5B9)
    return h


def fit_tree(X, y, problem_type: ProblemType, n_classes: int = 0, *, max_features=None,
             max_depth=None, min_samples_split=2, seed=0, sample=None, keys=None) -> Tree:
    X = np.ascontiguousarray(X, dtype=np.float64)
    n, p = X.shape
    if keys is None:
        keys = column_keys(X)
    if sample is None:
        sample = np.arange(n)
    Xs = np.ascontiguousarray(X[sample])
    if problem_type is ProblemType.CLASSIFICATION:
        yc = np.asarray(y, dtype=np.int64)[sample]
        yf = yc.astype(np.float64)
        k = int(n_classes) or int(yc.max()) + 1
    else:
        yf = np.asarray(y, dtype=np.float64)[sample]
        yc = np.zeros(len(sample), np.int64)
        k = 0
    arrays = _grow(
        Xs, np.ascontiguousarray(yf), np.ascontiguousarray(yc), k,
        p if max_features is None else int(max_features),
        0 if max_depth is None else int(max_depth),
        int(min_samples_split),
        np.uint64(seed % 2**64),
        keys,
    )
    return Tree(*arrays, sample=np.asarray(sample))


def _threads() -> int:
    env = os.environ.get("DIMCUT_THREADS")
    if env:
        return max(1, int(env))
    return os.cpu_count() or 1


@dataclass(frozen=True, eq=False)
class FittedForest:
    trees: tuple[Tree, ...]
    problem_type: ProblemType
    n_classes: int
    n_features: int
    feature_names: tuple[str, ...]

    def predict(self, X) -> np.ndarray:
        X = np.ascontiguousarray(X, dtype=np.float64)
        if self.problem_type is ProblemType.REGRESSION:
            return np.mean([t.leaf_values(X)[:, 0] for t in self.trees], axis=0)
        votes = np.zeros((X.shape[0], self.n_classes), dtype=np.int64)
        rows = np.arange(X.shape[0])
        for t in self.trees:
            votes[rows, np.argmax(t.leaf_values(X), axis=1)] += 1
        return np.argmax(votes, axis=1)  # ties go to the lower class

    def oob_score(self, dataset: Dataset) -> float:
        """Out-of-bag R^2 (regression) or accuracy (classification)."""
        X = np.ascontiguousarray(dataset.features)
        n = X.shape[0]
        y = dataset.target
        if self.problem_type is ProblemType.REGRESSION:
            acc = np.zeros(n)
        else:
            acc = np.zeros((n, self.n_classes))
        hits = np.zeros(n, dtype=np.int64)
        for t in self.trees:
            oob = np.setdiff1d(np.arange(n), t.sample)
            if oob.size == 0:
                continue
            vals = t.leaf_values(X[oob])
            if self.problem_type is ProblemType.REGRESSION:
                acc[oob] += vals[:, 0]
            else:
                acc[oob, np.argmax(vals, axis=1)] += 1
            hits[oob] += 1
        seen = hits > 0
        if self.problem_type is ProblemType.REGRESSION:
            pred = acc[seen] / hits[seen]
            ss_tot = np.sum((y[seen] - y[seen].mean()) ** 2)
            return 0.0 if ss_tot == 0 else 1.0 - np.sum((y[seen] - pred) ** 2) / ss_tot
        return float(np.mean(np.argmax(acc[seen], axis=1) == y[seen]))


def fit_forest(dataset: Dataset, config: ForestConfig = ForestConfig()) -> FittedForest:
    n, p = dataset.features.shape
    k = config.features_per_split(dataset.problem_type, p)
    X = np.ascontiguousarray(dataset.features)
    keys = column_keys(X)

    def one(t: int) -> Tree:
        g = rng(config.seed, t)
        sample = g.integers(0, n, n) if config.bootstrap else np.arange(n)
        tree_seed = int(g.integers(0, 2**63))
        return fit_tree(
            X, dataset.target, dataset.problem_type, dataset.n_classes,
            max_features=k, max_depth=config.max_depth,
            min_samples_split=config.min_samples_split, seed=tree_seed, sample=sample,
            keys=keys,
        )

    workers = min(_threads(), config.n_trees)
    if workers > 1:
        with ThreadPoolExecutor(workers) as pool:
            trees = tuple(pool.map(one, range(config.n_trees)))
    else:
        trees = tuple(one(t) for t in range(config.n_trees))
    return FittedForest(trees, dataset.problem_type, dataset.n_classes, p, dataset.feature_names)


def feature_importance(forest: FittedForest) -> ImportanceVector:
    raw = np.mean([t.importance for t in forest.trees], axis=0)
    total = raw.sum()
    if not total > 0:
        raise ValueError("forest made no splits; importances are undefined")
    return ImportanceVector.from_scores(raw / total, Source.FOREST)
