"""Random-case check of the selection/extraction decision rule."""
from __future__ import annotations

from dataclasses import dataclass

import numpy as np

from .decision import Method, decide
from .tabular import rng

ACC_LOW, ACC_HIGH = 0.6, 0.99
SPREAD = 0.2


@dataclass(frozen=True)
class ValidationCase:
    acc_fs: float
    acc_fe: float
    w_interp: float
    w_integ: float
    interpret_s: float
    integ_s: float
    label: Method


@dataclass(frozen=True)
class ValidationResult:
    cases: tuple[ValidationCase, ...]
    verdict: bool

    @property
    def n_selection(self) -> int:
        return sum(c.label is Method.SELECTION for c in self.cases)

    @property
    def n_extraction(self) -> int:
        return len(self.cases) - self.n_selection

    def summary(self) -> str:
        return (f"n_cases={len(self.cases)}, n_selection={self.n_selection}, "
                f"n_extraction={self.n_extraction}, verdict={str(self.verdict).lower()}")

    def scatter_csv(self) -> str:
        lines = ["interpret_s,integ_s,label"]
        lines += [f"{c.interpret_s!r},{c.integ_s!r},{c.label.value}" for c in self.cases]
        return "\n".join(lines) + "\n"


def run_validation(n_cases: int = 250, seed: int = 1, w_interp: float | None = None) -> ValidationResult:
    """Draw correlated accuracy pairs and weights, label each by ``decide``.

    ``w_interp`` pins the interpretability weight instead of drawing it.
    """
    if n_cases < 1:
        raise ValueError("n_cases must be >= 1")
    g = rng(seed)
    acc_fs = g.uniform(ACC_LOW, ACC_HIGH, n_cases)
    acc_fe = np.clip(acc_fs + g.uniform(-SPREAD, SPREAD, n_cases), ACC_LOW, ACC_HIGH)
    weights = g.uniform(0.0, 1.0, n_cases) if w_interp is None else np.full(n_cases, w_interp)
    cases = []
    verdict = True
    for a, b, w in zip(acc_fs.tolist(), acc_fe.tolist(), weights.tolist()):
        s1, s2, label = decide(a, b, w, 1.0 - w)
        cases.append(ValidationCase(a, b, w, 1.0 - w, s1, s2, label))
        # re-derive the threshold comparison directly
        expected = Method.SELECTION if w * a >= (1.0 - w) * b else Method.EXTRACTION
        verdict = verdict and expected is label
    return ValidationResult(tuple(cases), verdict)
