"""Tabular datasets: validation, CSV I/O and synthetic generators."""
from __future__ import annotations

import csv
import enum
import math
import os
import tempfile
from dataclasses import dataclass
from pathlib import Path

import numpy as np

DEFAULT_SEED = 1


class ProblemType(enum.Enum):
    REGRESSION = "regression"
    CLASSIFICATION = "classification"

    @classmethod
    def parse(cls, value: "str | ProblemType") -> "ProblemType":
        if isinstance(value, cls):
            return value
        try:
            return cls(str(value).strip().lower())
        except ValueError:
            raise ValueError(f"unknown problem type {value!r}") from None


class CsvFormatError(ValueError):
    """Raised when a CSV cell cannot be parsed; row/column are 1-based file positions."""

    def __init__(self, message: str, row: int | None = None, column: int | None = None):
        super().__init__(message)
        self.row = row
        self.column = column


def rng(seed: int, *keys: int) -> np.random.Generator:
    """PCG64 stream derived from ``seed`` and optional integer sub-keys."""
    return np.random.Generator(np.random.PCG64(np.random.SeedSequence([int(seed), *map(int, keys)])))


@dataclass(frozen=True, eq=False)
class Dataset:
    feature_names: tuple[str, ...]
    features: np.ndarray
    target: np.ndarray
    problem_type: ProblemType

    def __post_init__(self):
        names = tuple(str(n) for n in self.feature_names)
        X = np.array(self.features, dtype=np.float64)
        if X.ndim != 2:
            raise ValueError("features must be a 2-D matrix")
        n_rows, n_features = X.shape
        if n_features < 1 or n_rows < 2:
            raise ValueError(f"need at least 2 rows and 1 feature, got {X.shape}")
        if len(names) != n_features:
            raise ValueError(f"{len(names)} feature names for {n_features} columns")
        if len(set(names)) != len(names):
            raise ValueError("feature names must be unique")
        ptype = ProblemType.parse(self.problem_type)
        y = np.asarray(self.target)
        if y.ndim != 1 or y.shape[0] != n_rows:
            raise ValueError(f"target length {y.shape} does not match {n_rows} rows")
        if ptype is ProblemType.CLASSIFICATION:
            yf = y.astype(np.float64)
            if not np.all(np.isfinite(yf)) or np.any(yf != np.round(yf)):
                raise ValueError("classification targets must be integers")
            y = yf.astype(np.int64)
            if y.min() < 0:
                raise ValueError("class labels must be nonnegative")
            counts = np.bincount(y)
            if counts.size < 2 or np.any(counts == 0):
                raise ValueError(
                    "classification targets must be 0..n_classes-1 with every class "
                    f"present and at least 2 classes (counts={counts.tolist()})"
                )
        else:
            y = y.astype(np.float64)
        X.setflags(write=False)
        y = np.array(y)
        y.setflags(write=False)
        object.__setattr__(self, "feature_names", names)
        object.__setattr__(self, "features", X)
        object.__setattr__(self, "target", y)
        object.__setattr__(self, "problem_type", ptype)

    @property
    def n_rows(self) -> int:
        return self.features.shape[0]

    @property
    def n_features(self) -> int:
        return self.features.shape[1]

    @property
    def n_classes(self) -> int:
        if self.problem_type is not ProblemType.CLASSIFICATION:
            return 0
        return int(self.target.max()) + 1

    def with_features(self, features: np.ndarray, names) -> "Dataset":
        return Dataset(tuple(names), features, self.target, self.problem_type)

    def select(self, columns) -> "Dataset":
        columns = list(columns)
        return self.with_features(
            self.features[:, columns], [self.feature_names[c] for c in columns]
        )

    def equals(self, other: "Dataset") -> bool:
        return (
            self.problem_type is other.problem_type
            and self.feature_names == other.feature_names
            and np.array_equal(self.features, other.features)
            and np.array_equal(self.target, other.target)
        )


def _parse_cell(text: str, row: int, column: int) -> float:
    try:
        value = float(text)
    except ValueError:
        raise CsvFormatError(
            f"row {row}, column {column}: cannot parse {text!r} as a number", row, column
        ) from None
    if not math.isfinite(value):
        raise CsvFormatError(f"row {row}, column {column}: non-finite value {text!r}", row, column)
    return value


def load_csv(path, problem_type) -> Dataset:
    """Read a header + numeric rows CSV; the last column is the target."""
    ptype = ProblemType.parse(problem_type)
    with open(path, newline="") as fh:
        lines = list(csv.reader(fh))
    lines = [r for r in lines if r]
    if not lines:
        raise CsvFormatError(f"{path}: empty file")
    header = [h.strip() for h in lines[0]]
    if len(header) < 2:
        raise CsvFormatError(f"{path}: need at least one feature column and a target column", 1)
    rows = []
    for lineno, record in enumerate(lines[1:], start=2):
        if len(record) != len(header):
            raise CsvFormatError(
                f"row {lineno}: expected {len(header)} cells, got {len(record)}", lineno
            )
        rows.append([_parse_cell(c.strip(), lineno, j) for j, c in enumerate(record, start=1)])
    if not rows:
        raise CsvFormatError(f"{path}: no data rows")
    data = np.array(rows, dtype=np.float64)
    target = data[:, -1]
    if ptype is ProblemType.CLASSIFICATION:
        bad = np.flatnonzero(target != np.round(target))
        if bad.size:
            r = int(bad[0]) + 2
            raise CsvFormatError(
                f"row {r}, column {len(header)}: class label {target[bad[0]]!r} is not an integer",
                r,
                len(header),
            )
    return Dataset(tuple(header[:-1]), data[:, :-1], target, ptype)


def _format(value, integer: bool) -> str:
    return str(int(value)) if integer else repr(float(value))


def dataset_to_csv_text(dataset: Dataset) -> str:
    integer = dataset.problem_type is ProblemType.CLASSIFICATION
    header = ",".join([*dataset.feature_names, "target"])
    out = [header]
    for x, y in zip(dataset.features.tolist(), dataset.target.tolist()):
        out.append(",".join([*(repr(v) for v in x), _format(y, integer)]))
    return "\n".join(out) + "\n"


def write_atomic(path, text: str) -> None:
    """Write ``text`` via a sibling temp file and rename."""
    path = Path(path)
    fd, tmp = tempfile.mkstemp(dir=path.parent, prefix=f".{path.name}.", suffix=".tmp")
    try:
        with os.fdopen(fd, "w", newline="\n") as fh:
            fh.write(text)
        os.replace(tmp, path)
    except BaseException:
        if os.path.exists(tmp):
            os.unlink(tmp)
        raise


def save_csv(dataset: Dataset, path) -> None:
    write_atomic(path, dataset_to_csv_text(dataset))


@dataclass(frozen=True)
class SynthSpec:
    problem_type: ProblemType
    n_rows: int
    n_features: int
    n_informative: int | None = None  # None: all features informative
    noise_scale: float = 10.0
    n_classes: int = 2
    seed: int = DEFAULT_SEED

    def __post_init__(self):
        object.__setattr__(self, "problem_type", ProblemType.parse(self.problem_type))
        if self.n_informative is None:
            object.__setattr__(self, "n_informative", self.n_features)
        if self.n_rows < 2 or self.n_features < 1:
            raise ValueError("n_rows must be >= 2 and n_features >= 1")
        if not 1 <= self.n_informative <= self.n_features:
            raise ValueError("n_informative must be in [1, n_features]")
        if self.noise_scale < 0:
            raise ValueError("noise_scale must be nonnegative")
        if self.problem_type is ProblemType.CLASSIFICATION:
            if self.n_classes < 2:
                raise ValueError("n_classes must be >= 2")
            if self.n_informative < 63 and self.n_classes > 2**self.n_informative:
                raise ValueError(
                    f"cannot place {self.n_classes} classes on distinct vertices of a "
                    f"{self.n_informative}-dimensional hypercube"
                )
            if self.n_rows < self.n_classes:
                raise ValueError("n_rows must be at least n_classes")


def _names(n: int) -> tuple[str, ...]:
    return tuple(f"x{i}" for i in range(n))


def regression_weights(spec: SynthSpec) -> np.ndarray:
    """Coefficient vector used by :func:`make_regression` for ``spec``."""
    return _regression_draw(spec)[1]


def _regression_draw(spec: SynthSpec):
    g = rng(spec.seed)
    X = g.standard_normal((spec.n_rows, spec.n_features))
    w = np.zeros(spec.n_features)
    w[: spec.n_informative] = g.uniform(1.0, 100.0, spec.n_informative)
    noise = g.standard_normal(spec.n_rows) * spec.noise_scale
    return X, w, noise


def make_regression(spec: SynthSpec) -> Dataset:
    if spec.problem_type is not ProblemType.REGRESSION:
        raise ValueError("make_regression needs a regression spec")
    X, w, noise = _regression_draw(spec)
    y = X @ w
    if spec.noise_scale > 0:
        y = y + noise
    return Dataset(_names(spec.n_features), X, y, ProblemType.REGRESSION)


_POOL = 256


def _class_vertices(n_classes: int, dims: int, g: np.random.Generator) -> np.ndarray:
    # Farthest-point choice within a pool of distinct vertices; whole cube when small.
    if dims <= 8:
        pool = ((np.arange(2**dims)[:, None] >> np.arange(dims)) & 1).astype(np.int8)
        pool = pool[g.permutation(len(pool))]
    else:
        seen: dict[bytes, np.ndarray] = {}
        while len(seen) < max(_POOL, n_classes):
            v = g.integers(0, 2, dims, dtype=np.int8)
            seen.setdefault(v.tobytes(), v)
        pool = np.array(list(seen.values()))
    chosen = [0]
    mind = np.sum(pool != pool[0], axis=1)
    for _ in range(1, n_classes):
        nxt = int(np.argmax(mind))
        chosen.append(nxt)
        mind = np.minimum(mind, np.sum(pool != pool[nxt], axis=1))
    return 2.0 * pool[chosen].astype(np.float64) - 1.0


def make_classification(spec: SynthSpec) -> Dataset:
    if spec.problem_type is not ProblemType.CLASSIFICATION:
        raise ValueError("make_classification needs a classification spec")
    g = rng(spec.seed)
    k = spec.n_informative
    centers = _class_vertices(spec.n_classes, k, g)
    y = np.arange(spec.n_rows) % spec.n_classes
    y = y[g.permutation(spec.n_rows)]
    X = g.standard_normal((spec.n_rows, spec.n_features))
    X[:, :k] += centers[y]
    return Dataset(_names(spec.n_features), X, y, ProblemType.CLASSIFICATION)


def generate(spec: SynthSpec) -> Dataset:
    if spec.problem_type is ProblemType.REGRESSION:
        return make_regression(spec)
    return make_classification(spec)


def parse_synth(text: str) -> SynthSpec:
    """Parse ``"kind,rows,features[,key=value...]"``.

    Keys: ``seed``, ``informative``, ``noise``, ``classes``.
    """
    parts = [p.strip() for p in text.split(",") if p.strip()]
    if len(parts) < 3:
        raise ValueError(f"synthetic spec {text!r} needs kind,rows,features")
    kw: dict = {}
    aliases = {"seed": "seed", "informative": "n_informative", "noise": "noise_scale",
               "classes": "n_classes"}
    for item in parts[3:]:
        key, sep, value = item.partition("=")
        if not sep or key.strip() not in aliases:
            raise ValueError(f"bad synthetic spec option {item!r}")
        name = aliases[key.strip()]
        kw[name] = float(value) if name == "noise_scale" else int(value)
    try:
        rows, feats = int(parts[1].replace("_", "")), int(parts[2])
    except ValueError:
        raise ValueError(f"bad row/feature counts in {text!r}") from None
    return SynthSpec(ProblemType.parse(parts[0]), rows, feats, **kw)
