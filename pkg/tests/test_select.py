import numpy as np
import pytest

from dyadtree import Dataset, select_model, select_uniform, split_halves, uniform_baseline
from dyadtree.data import DataError
from dyadtree.empirical import label_sum, misclassified
from dyadtree.dp import extract_classifier
from dyadtree.geometry import DyadicCube
from dyadtree.select import Halves

from conftest import random_dataset


def multiset(data):
    return sorted(zip(map(tuple, data.X.tolist()), data.y.tolist()))


def test_split_partition_and_determinism():
    rng = np.random.default_rng(0)
    data = random_dataset(rng, 8, 2)
    h = split_halves(data, 11)
    assert h.first.n == h.second.n == 4
    assert multiset(Dataset(np.vstack([h.first.X, h.second.X]), np.concatenate([h.first.y, h.second.y]))) == multiset(data)
    h2 = split_halves(data, 11)
    assert np.array_equal(h.first.X, h2.first.X) and np.array_equal(h.second.y, h2.second.y)


def test_split_odd():
    data = random_dataset(np.random.default_rng(1), 9, 1)
    h = split_halves(data, 3)
    assert h.first.n == h.second.n == 4
    assert h.set_aside is not None
    assert h.set_aside not in h.order


def test_split_too_small():
    with pytest.raises(DataError):
        split_halves(random_dataset(np.random.default_rng(1), 3, 1), 0)


def fixed_halves(monkeypatch, first, second):
    import dyadtree.select as sel

    monkeypatch.setattr(sel, "split_halves", lambda data, seed: Halves(first, second, None, np.arange(first.n + second.n)))


def test_select_example(monkeypatch, z1):
    second = Dataset([[0.2], [0.7]], [-1, 1])
    fixed_halves(monkeypatch, z1, second)
    rep = select_model(z1, "plain", [0, 1], seed=0)
    assert rep.holdout_eta == [0.0, 0.5]
    assert rep.m_star == 1
    assert rep.classifier.positive == {DyadicCube(1, (1,))}


def test_select_all_negative_holdout_picks_smallest(monkeypatch, z1):
    second = Dataset([[0.2], [0.7]], [-1, -1])
    fixed_halves(monkeypatch, z1, second)
    rep = select_model(z1, "plain", [0, 1, 2], seed=0)
    assert rep.holdout_eta == [0.0, -0.5, -0.5]
    assert rep.m_star == 0


def test_single_grid_value(z1):
    data = Dataset(np.vstack([z1.X, z1.X]), np.concatenate([z1.y, z1.y]))
    assert select_model(data, "plain", [0], seed=5).m_star == 0


@pytest.mark.parametrize("algo", ["plain", "decorated"])
@pytest.mark.parametrize("seed", range(6))
def test_selection_matches_direct_evaluation(algo, seed):
    rng = np.random.default_rng(seed)
    d = 1 + seed % 2
    data = random_dataset(rng, 60, d)
    rep = select_model(data, algo, seed=seed, j_max=6)
    h = split_halves(data, seed)
    from dyadtree.decorate import extract_decorated_classifier

    extract = extract_classifier if algo == "plain" else extract_decorated_classifier
    direct = [label_sum(extract(rep.table, m), h.second) for m in rep.m_grid]
    assert direct == rep.holdout_label_sums
    risks = [misclassified(extract(rep.table, m), h.second) for m in rep.m_grid]
    assert rep.m_grid[int(np.argmin(risks))] == rep.m_star
    assert label_sum(rep.classifier, h.second) == max(direct)


def test_reproducible():
    data = random_dataset(np.random.default_rng(4), 50, 2)
    a = select_model(data, "plain", seed=9)
    b = select_model(data, "plain", seed=9)
    assert a.m_star == b.m_star and a.holdout_label_sums == b.holdout_label_sums
    assert a.classifier.tree == b.classifier.tree


def test_m_grid_bounds(z1):
    with pytest.raises(ValueError):
        select_model(z1, "plain", [5], seed=0)
    with pytest.raises(ValueError):
        select_model(z1, "plain", [], seed=0)


def test_uniform_baseline_examples(z1):
    assert uniform_baseline(z1, 2).positive == {(1,)}
    assert uniform_baseline(z1, 1).positive == frozenset()
    allpos = Dataset(z1.X, np.ones(4, dtype=int))
    g = uniform_baseline(allpos, 3)
    assert g.positive == {(0,), (1,), (2,)}
    with pytest.raises(ValueError):
        uniform_baseline(z1, 0)
    with pytest.raises(ValueError):
        uniform_baseline(random_dataset(np.random.default_rng(0), 4, 3), 200)


def test_uniform_is_grid_erm():
    rng = np.random.default_rng(2)
    data = random_dataset(rng, 200, 2)
    g = uniform_baseline(data, 4)
    for i in range(4):
        for j in range(4):
            cell = (data.X[:, 0] * 4).astype(int).clip(0, 3) == i
            cell &= (data.X[:, 1] * 4).astype(int).clip(0, 3) == j
            assert ((i, j) in g.positive) == (data.y[cell].sum() > 0)


def test_select_uniform():
    rng = np.random.default_rng(3)
    data = random_dataset(rng, 100, 1)
    rep = select_uniform(data, [1, 2, 4], seed=1)
    assert rep.m_star in (1, 2, 4) and rep.classifier.l == rep.m_star
