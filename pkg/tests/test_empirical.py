import math
from fractions import Fraction

import numpy as np
import pytest
from hypothesis import given, settings, strategies as st

from dyadtree import Dataset, build_forest, empirical_risk, epsilon_finite, epsilon_vc, eta_bar, rho_bar
from dyadtree.empirical import (
    BoxUnion,
    GridClassifier,
    SetClassifier,
    count_in,
    empty_set,
    forest_label_sum,
    full_domain,
    interval,
    label_sum,
    misclassified,
)
from dyadtree.forest import CompleteTree
from dyadtree.geometry import DyadicCube, HCell, Hyperplane


def test_eta_bar_examples(z1):
    assert eta_bar(full_domain(1), z1) == 0
    assert eta_bar(interval(0.5, 1.0), z1) == 0.5
    assert eta_bar(empty_set(1), z1) == 0
    assert eta_bar(None, z1) == 0


def test_rho_bar_examples(z1):
    assert rho_bar(interval(0.0, 0.5), z1) == 0.5
    assert rho_bar(full_domain(1), z1) == 1
    assert rho_bar(empty_set(1), z1) == 0


def test_empirical_risk_examples(z1):
    assert empirical_risk(interval(0.5, 1.0), z1) == 0
    assert empirical_risk(empty_set(1), z1) == 0.5
    assert empirical_risk(full_domain(1), z1) == 0.5


def test_cube_and_hcell_regions(z1):
    right = DyadicCube(1, (1,))
    assert eta_bar(right, z1) == 0.5
    assert eta_bar([DyadicCube(1, (0,)), right], z1) == 0
    cell = HCell(DyadicCube(0, (0,)), Hyperplane((1.0,), 0.3), 1)
    assert label_sum(cell, z1) == 2


def test_epsilon_vc():
    assert epsilon_vc(1, 100, 2, 1) == pytest.approx(3 * math.log(100) / 100)
    assert epsilon_vc(1, 100, 2, 1) == pytest.approx(0.1382, abs=5e-5)
    assert epsilon_vc(10, 1000, 1, 2) == pytest.approx(0.1382, abs=5e-5)
    assert epsilon_vc(3, 3, 1, 1) == pytest.approx(3 * math.log(3) / 3)
    with pytest.raises(ValueError):
        epsilon_vc(0, 100, 1, 1)
    with pytest.raises(ValueError):
        epsilon_vc(1, 1, 1, 1)


def test_epsilon_finite():
    assert epsilon_finite(2, 100, 1) == pytest.approx(0.1766, abs=5e-5)
    assert epsilon_finite(100, 1000, 2) == pytest.approx(0.0614, abs=5e-5)
    assert epsilon_finite(1, 100, 1e-12) == pytest.approx(0.0, abs=1e-12)
    with pytest.raises(ValueError):
        epsilon_finite(1, 100, 0)


def random_classifier(rng, d):
    refined = {DyadicCube.root(d)}
    frontier = [DyadicCube.root(d)]
    for _ in range(rng.integers(0, 6)):
        q = frontier[rng.integers(len(frontier))]
        if q.level < 4:
            refined.add(q)
            frontier.extend(q.children())
    tree = CompleteTree.from_refined(refined, d) if len(refined) > 1 else CompleteTree([DyadicCube.root(d)])
    lv = tree.leaves()
    pos = [q for q in lv if rng.random() < 0.4]
    dec = {}
    for q in lv:
        if q not in pos and rng.random() < 0.3:
            dec[q] = HCell(q, Hyperplane(tuple(rng.normal(size=d)), float(rng.normal())), int(rng.integers(2)))
    return SetClassifier(tree, pos, dec)


@settings(deadline=None, max_examples=80)
@given(st.integers(0, 2**32 - 1), st.integers(1, 3), st.integers(1, 40))
def test_risk_eta_duality(seed, d, n):
    rng = np.random.default_rng(seed)
    data = Dataset(rng.random((n, d)), rng.choice([-1, 1], size=n))
    clf = random_classifier(rng, d)
    assert misclassified(clf, data) == data.positives - label_sum(clf, data)
    assert Fraction(misclassified(clf, data), n) == Fraction(data.positives, n) - Fraction(label_sum(clf, data), n)
    assert abs(label_sum(clf, data)) <= count_in(clf, data)


def test_additivity_and_forest_path():
    rng = np.random.default_rng(5)
    data = Dataset(rng.random((80, 2)), rng.choice([-1, 1], size=80))
    f = build_forest(data, j_max=5)
    lv = f.tree.leaves()
    chosen = [q for q in lv if rng.random() < 0.5]
    direct = label_sum(chosen, data)
    assert direct == forest_label_sum(chosen, f)
    assert direct == sum(label_sum(q, data) for q in chosen)


def test_set_classifier_membership_matches_leaves():
    rng = np.random.default_rng(9)
    clf = random_classifier(rng, 2)
    X = rng.random((300, 2))
    got = clf.contains_many(X)
    for x, g in zip(X, got):
        leaf = next(q for q in clf.tree.leaves() if q.contains(x))
        if leaf in clf.positive:
            want = True
        elif leaf in clf.decorations:
            want = clf.decorations[leaf].contains(x)
        else:
            want = False
        assert g == want


def test_grid_classifier():
    g = GridClassifier(2, 3, frozenset({(0, 0), (2, 1)}))
    assert g.contains((0.1, 0.2))
    assert g.contains((1.0, 0.5))
    assert not g.contains((0.5, 0.5))
    assert len(g.boxes()) == 2


def test_box_union_disjoint_parts():
    u = BoxUnion(1, interval(0.0, 0.25).parts + interval(0.5, 1.0).parts)
    assert list(u.contains_many(np.array([[0.1], [0.3], [1.0]]))) == [True, False, True]
