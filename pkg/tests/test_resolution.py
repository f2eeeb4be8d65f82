import math

import numpy as np
import pytest
from hypothesis import given, settings
from hypothesis import strategies as st

from dimcut.forest import ImportanceVector, Source
from dimcut.resolution import auto_cut, cut_scores_csv, prune_tail, select_by_target


def iv(values):
    return ImportanceVector.from_scores(values, Source.FOREST)


def brute_force_cut(sorted_scores, scale=10.0):
    """Independent scorer: every cut position, explicit loops, ties to fewer features."""
    phi = [v * scale for v in sorted_scores]
    best_f, best = None, None
    for f in range(1, len(phi)):
        lam = 0.0
        for i in range(f):
            lam += phi[i]
        total = lam + (phi[f - 1] - phi[f]) ** 2
        if best is None or total > best:
            best_f, best = f, total
    return best_f


def brute_force_prune(sorted_scores):
    kept = []
    before = 0.0
    for i, v in enumerate(sorted_scores):
        if i > 0 and before >= 0.70 - 1e-12 and v < 0.03:
            break
        kept.append(v)
        before += v
    return kept


importances = st.lists(st.floats(0.0, 1.0), min_size=1, max_size=30).filter(
    lambda v: sum(v) > 1e-6
).map(lambda v: np.array(v) / np.sum(v))


def test_worked_example_target_80():
    c = select_by_target(iv([0.35, 0.30, 0.15, 0.10, 0.10]), 0.80)
    assert c.n_kept == 3
    assert c.achieved_resolution == 0.80


def test_single_feature_target():
    c = select_by_target(iv([1.0]), 0.5)
    assert (c.n_kept, c.achieved_resolution) == (1, 1.0)


def test_uniform_needs_all():
    # prefix sums 0.25, 0.5, 0.75, 1.0: first >= 0.9 is the fourth
    c = select_by_target(iv([0.25] * 4), 0.90)
    assert (c.n_kept, c.achieved_resolution) == (4, 1.0)


@pytest.mark.parametrize("target", [0.0, 1.0, -0.1, 1.5])
def test_target_out_of_range(target):
    with pytest.raises(ValueError):
        select_by_target(iv([0.5, 0.5]), target)


@settings(max_examples=200, deadline=None)
@given(scores=importances, target=st.floats(0.01, 0.99))
def test_select_by_target_is_minimal(scores, target):
    imp = iv(scores)
    c = select_by_target(imp, target)
    s = imp.sorted_scores
    assert c.achieved_resolution >= target - 1e-9
    assert abs(c.achieved_resolution - math.fsum(s[: c.n_kept])) <= 1e-9
    if c.n_kept > 1:
        assert math.fsum(s[: c.n_kept - 1]) < target - 1e-9


def test_prune_drops_tail():
    p = prune_tail(iv([0.50, 0.25, 0.22, 0.02, 0.01]))
    assert p.sorted_scores.tolist() == [0.50, 0.25, 0.22]


def test_prune_vacuous():
    p = prune_tail(iv([0.40, 0.35, 0.25]))
    assert p.sorted_scores.tolist() == [0.40, 0.35, 0.25]


def test_prune_sorts_first():
    imp = iv([0.70, 0.02, 0.28])
    assert imp.sorted_scores.tolist() == [0.70, 0.28, 0.02]
    p = prune_tail(imp)
    assert p.sorted_scores.tolist() == [0.70, 0.28]
    assert p.order.tolist() == [0, 2]


def test_prune_boundary_is_inclusive():
    # cumulative before the small entry is exactly 0.70: dropped
    p = prune_tail(iv([0.35, 0.35, 0.29, 0.01]))
    assert p.sorted_scores.tolist() == [0.35, 0.35, 0.29]
    # 0.69 before the first 0.02 entry: kept; 0.71 before the second: dropped
    p = prune_tail(iv([0.40, 0.29] + [0.02] * 15 + [0.01]))
    assert p.sorted_scores.tolist() == [0.40, 0.29, 0.02]


def test_prune_does_not_renormalize():
    p = prune_tail(iv([0.50, 0.25, 0.22, 0.02, 0.01]))
    assert abs(p.scores.sum() - 1.0) < 1e-12
    assert abs(p.sorted_scores.sum() - 0.97) < 1e-12


@settings(max_examples=300, deadline=None)
@given(scores=importances)
def test_prune_predicate(scores):
    imp = iv(scores)
    p = prune_tail(imp)
    assert len(p) >= 1
    full = imp.sorted_scores.tolist()
    kept = p.sorted_scores.tolist()
    assert kept == brute_force_prune(full)
    before = 0.0
    for i, v in enumerate(full):
        dropped = i >= len(kept)
        predicate = i > 0 and before >= 0.70 - 1e-12 and v < 0.03
        if dropped:
            assert predicate
        elif i > 0:
            assert not predicate
        before += v


def test_auto_cut_two_equal():
    c = auto_cut(iv([0.5, 0.5]))
    assert (c.n_kept, c.achieved_resolution) == (1, 0.5)
    assert c.scores[0].total == 5.0


def test_auto_cut_three():
    c = auto_cut(iv([0.6, 0.3, 0.1]))
    assert [round(s.total, 10) for s in c.scores] == [15.0, 13.0]
    assert (c.n_kept, c.achieved_resolution) == (1, 0.6)


def test_auto_cut_reference_profile():
    c = auto_cut(iv([0.35, 0.30, 0.15, 0.10, 0.10]))
    assert [round(s.total, 10) for s in c.scores] == [3.75, 8.75, 8.25, 9.0]
    assert c.n_kept == 4
    assert abs(c.achieved_resolution - 0.90) < 1e-12


def test_auto_cut_single_survivor():
    c = auto_cut(iv([1.0]))
    assert (c.n_kept, c.achieved_resolution, c.scores) == (1, 1.0, ())


def test_auto_cut_resolution_uses_unscaled_values():
    c = auto_cut(iv([0.5, 0.25, 0.22, 0.02, 0.01]))
    s = iv([0.5, 0.25, 0.22, 0.02, 0.01]).sorted_scores
    assert c.achieved_resolution == pytest.approx(math.fsum(s[: c.n_kept]), abs=1e-12)


def test_auto_cut_matches_brute_force_1000():
    g = np.random.default_rng(20240601)
    for _ in range(1000):
        n = int(g.integers(2, 51))
        raw = g.random(n) ** g.uniform(0.5, 4.0)
        imp = iv(raw / raw.sum())
        pruned = brute_force_prune(imp.sorted_scores.tolist())
        expected = 1 if len(pruned) < 2 else brute_force_cut(pruned)
        assert auto_cut(imp).n_kept == expected


@settings(max_examples=100, deadline=None)
@given(scores=importances, data=st.data())
def test_auto_cut_permutation_invariant(scores, data):
    perm = data.draw(st.permutations(range(len(scores))))
    a = auto_cut(iv(scores))
    b = auto_cut(iv(np.asarray(scores)[list(perm)]))
    assert a.n_kept == b.n_kept
    assert a.achieved_resolution == b.achieved_resolution
    assert auto_cut(iv(scores)) == a


def test_cut_scores_csv():
    text = cut_scores_csv(auto_cut(iv([0.6, 0.3, 0.1])))
    rows = text.strip().splitlines()
    assert rows[0] == "cut_position,resolution,weighted_gap,total"
    assert len(rows) == 3
