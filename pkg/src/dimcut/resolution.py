"""Choosing how many of the top-ranked features or components to keep."""
from __future__ import annotations

from dataclasses import dataclass
from decimal import Decimal

import numpy as np

from .forest import ImportanceVector

SCORE_SCALE = 10.0
TAIL_RESOLUTION = 0.70
TAIL_IMPORTANCE = 0.03
_EPS = 1e-12


@dataclass(frozen=True)
class CutScore:
    position: int  # keep this many features
    resolution: float
    weighted_gap: float

    @property
    def total(self) -> float:
        return self.resolution + self.weighted_gap


@dataclass(frozen=True)
class CutDecision:
    n_kept: int
    achieved_resolution: float
    target: float | None = None  # None means the automatic rule
    scores: tuple[CutScore, ...] = ()

    @property
    def auto(self) -> bool:
        return self.target is None


def _decimal_sum(values) -> float:
    # shortest-repr decimals, so 0.35 + 0.30 + 0.15 reports 0.8
    return float(sum((Decimal(repr(float(v))) for v in values), Decimal(0)))


def prefix_resolution(importance: ImportanceVector, n: int) -> float:
    return _decimal_sum(importance.sorted_scores[:n].tolist())


def select_by_target(importance: ImportanceVector, target: float) -> CutDecision:
    """Smallest prefix of the ranking whose cumulative importance reaches ``target``."""
    if not 0.0 < target < 1.0:
        raise ValueError(f"target resolution must lie in (0, 1), got {target!r}")
    s = importance.sorted_scores.tolist()
    for n in range(1, len(s) + 1):
        acc = _decimal_sum(s[:n])
        if acc >= target - 1e-9:
            return CutDecision(n, acc, target)
    return CutDecision(len(s), _decimal_sum(s), target)


def prune_tail(importance: ImportanceVector, *, tail=TAIL_RESOLUTION,
               floor=TAIL_IMPORTANCE) -> ImportanceVector:
    """Drop ranked features lying past ``tail`` cumulative importance and below ``floor``.

    In descending order the dropped entries always form a suffix. Scores keep
    their original normalization.
    """
    s = importance.sorted_scores
    cum_before = 0.0
    keep = len(s)
    for i, v in enumerate(s.tolist()):
        if i > 0 and cum_before >= tail - _EPS and v < floor:
            keep = i
            break
        cum_before += v
    return ImportanceVector(importance.scores, importance.order[:keep], importance.source)


def auto_cut(importance: ImportanceVector, scale: float = SCORE_SCALE) -> CutDecision:
    """Pick the cut maximizing cumulative resolution plus the squared gap to the next entry."""
    pruned = prune_tail(importance)
    phi = pruned.sorted_scores * scale
    n = phi.size
    if n < 2:
        return CutDecision(1, prefix_resolution(importance, 1), None, ())
    lam = np.cumsum(phi)
    gaps = (phi[:-1] - phi[1:]) ** 2
    scores = tuple(
        CutScore(f + 1, float(lam[f]), float(gaps[f])) for f in range(n - 1)
    )
    best = 0
    for f in range(1, n - 1):
        if scores[f].total > scores[best].total:
            best = f
    n_kept = best + 1
    return CutDecision(n_kept, prefix_resolution(importance, n_kept), None, scores)


def cut(importance: ImportanceVector, target: float | None) -> CutDecision:
    return auto_cut(importance) if target is None else select_by_target(importance, target)


def cut_scores_csv(decision: CutDecision) -> str:
    lines = ["cut_position,resolution,weighted_gap,total"]
    for c in decision.scores:
        lines.append(f"{c.position},{c.resolution!r},{c.weighted_gap!r},{c.total!r}")
    return "\n".join(lines) + "\n"
