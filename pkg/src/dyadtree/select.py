"""Hold-out model selection over the nested estimators, and the uniform-grid baseline."""

from __future__ import annotations

from dataclasses import dataclass, field
from typing import Sequence

import numpy as np

from .data import Dataset, DataError
from .decorate import decorated_energy, extract_decorated_classifier
from .dp import EnergyTable, compute_energy, extract_classifier
from .empirical import GridClassifier, label_sum, misclassified
from .forest import OccupancyForest, build_forest
from .geometry import DEFAULT_JMAX, DyadicCube, grid_coords

MAX_GRID_CELLS = 1 << 20
ALGORITHMS = ("plain", "decorated", "uniform")


@dataclass
class Halves:
    first: Dataset
    second: Dataset
    set_aside: int | None  # original index of the sample dropped for odd n
    order: np.ndarray = field(repr=False)


def split_halves(data: Dataset, seed: int) -> Halves:
    """Shuffle with ``seed`` and cut into two equal halves (odd n drops one sample)."""
    if data.n < 4:
        raise DataError(f"model selection needs at least 4 samples, got {data.n}")
    order = np.random.default_rng(seed).permutation(data.n)
    dropped = None
    if data.n % 2:
        dropped = int(order[-1])
        order = order[:-1]
    half = len(order) // 2
    return Halves(data.take(order[:half]), data.take(order[half:]), dropped, order)


@dataclass
class SelectionReport:
    m_star: int
    classifier: object
    m_grid: list[int]
    holdout_eta: list[float]
    holdout_label_sums: list[int]
    n_first: int
    n_second: int
    set_aside: int | None
    algorithm: str
    table: EnergyTable | None = field(default=None, repr=False)

    def summary(self) -> str:
        best = self.holdout_eta[self.m_grid.index(self.m_star)]
        return (
            f"algorithm={self.algorithm} m*={self.m_star} "
            f"holdout_eta={best:.6g} halves={self.n_first}/{self.n_second} "
            f"candidates={len(self.m_grid)}"
        )


def _holdout_stats(forest: OccupancyForest, holdout: Dataset) -> dict[DyadicCube, np.ndarray]:
    """Indices of held-out points per occupied cube of the fitted forest."""
    j_max = forest.j_max
    g = grid_coords(holdout.X, j_max)
    out: dict[DyadicCube, np.ndarray] = {}
    levels: dict[int, set] = {}
    for q in forest.occupied():
        levels.setdefault(q.level, set()).add(q.index)
    for j, wanted in levels.items():
        idx_j = g >> (j_max - j)
        groups: dict[tuple, list[int]] = {}
        for i, row in enumerate(map(tuple, idx_j.tolist())):
            if row in wanted:
                groups.setdefault(row, []).append(i)
        for key, members in groups.items():
            out[DyadicCube(j, key)] = np.asarray(members, dtype=np.int64)
    return out


def _holdout_values(table: EnergyTable, holdout: Dataset) -> dict[DyadicCube, int]:
    """Held-out label sum of each cube's positive part when kept as a leaf."""
    forest = table.forest
    members = _holdout_stats(forest, holdout)
    values = {}
    for q, idx in members.items():
        if table.algorithm == "decorated":
            r = table.decorations[q]
            if r.gamma0_numerator <= 0:
                continue
            sel = idx
            if r.cell.cut is not None:
                sel = idx[r.cell.cut.sides(holdout.X[idx]) == r.cell.side]
            values[q] = int(holdout.y[sel].sum())
        elif forest.label_sum(q) > 0:
            values[q] = int(holdout.y[idx].sum())
    return values


def default_m_grid(table: EnergyTable, n_bar: int) -> list[int]:
    return list(range(0, min(n_bar, table.saturation()) + 1))


def select_model(
    data: Dataset,
    algo: str = "plain",
    m_grid: Sequence[int] | None = None,
    seed: int = 0,
    j_max: int = DEFAULT_JMAX,
    min_split: int = 2,
) -> SelectionReport:
    """Fit every Omega_m on the first half, keep the one with the largest held-out eta-bar.

    Ties go to the smallest m.
    """
    if algo not in ("plain", "decorated"):
        raise ValueError(f"unknown algorithm {algo!r}")
    halves = split_halves(data, seed)
    first, second = halves.first, halves.second
    n_bar = first.n
    if m_grid is not None:
        m_grid = sorted(set(int(m) for m in m_grid))
        if not m_grid:
            raise ValueError("m_grid is empty")
        if m_grid[0] < 0 or m_grid[-1] > n_bar:
            raise ValueError(f"m_grid must lie in 0..{n_bar}")
    forest = build_forest(first, j_max, min_split)
    m_max = n_bar if m_grid is None else m_grid[-1]
    if algo == "plain":
        table = compute_energy(forest, m_max)
    else:
        table = decorated_energy(forest, m_max)
    if m_grid is None:
        m_grid = default_m_grid(table, n_bar)
    sums_all = table.leaf_sums_all_m(_holdout_values(table, second), m_top=m_grid[-1])
    sums = [int(sums_all[m]) for m in m_grid]
    k = int(np.argmax(sums))
    m_star = m_grid[k]
    extract = extract_classifier if algo == "plain" else extract_decorated_classifier
    clf = extract(table, m_star)
    return SelectionReport(
        m_star=m_star,
        classifier=clf,
        m_grid=list(m_grid),
        holdout_eta=[s / second.n for s in sums],
        holdout_label_sums=sums,
        n_first=first.n,
        n_second=second.n,
        set_aside=halves.set_aside,
        algorithm=algo,
        table=table,
    )


def uniform_baseline(data: Dataset, l: int) -> GridClassifier:
    """Union of the cells of the uniform ``l^d`` grid with positive label sum."""
    if l < 1:
        raise ValueError("l must be at least 1")
    d = data.d
    if l ** d > MAX_GRID_CELLS:
        raise ValueError(f"grid with {l}^{d} cells exceeds the cap {MAX_GRID_CELLS}")
    probe = GridClassifier(d, l)
    cells = probe.cells_of(data.X)
    codes = np.ravel_multi_index(cells.T, (l,) * d)
    sums = np.bincount(codes, weights=data.y, minlength=l ** d)
    positive = frozenset(
        tuple(int(v) for v in np.unravel_index(c, (l,) * d)) for c in np.flatnonzero(sums > 0)
    )
    return GridClassifier(d, l, positive)


def select_uniform(data: Dataset, l_grid: Sequence[int] | None = None, seed: int = 0) -> SelectionReport:
    """Hold-out choice of the grid resolution ``l`` for the uniform baseline."""
    halves = split_halves(data, seed)
    first, second = halves.first, halves.second
    if l_grid is None:
        top = max(1, int(round(first.n ** (1.0 / first.d))))
        while top ** first.d > MAX_GRID_CELLS:
            top -= 1
        l_grid = range(1, top + 1)
    l_grid = sorted(set(int(l) for l in l_grid))
    fits = [uniform_baseline(first, l) for l in l_grid]
    sums = [label_sum(f, second) for f in fits]
    k = int(np.argmax(sums))
    return SelectionReport(
        m_star=l_grid[k],
        classifier=fits[k],
        m_grid=list(l_grid),
        holdout_eta=[s / second.n for s in sums],
        holdout_label_sums=sums,
        n_first=first.n,
        n_second=second.n,
        set_aside=halves.set_aside,
        algorithm="uniform",
    )


def holdout_risks(report: SelectionReport, data: Dataset, seed: int) -> tuple[float, float]:
    """Empirical risk of the chosen classifier on both halves."""
    h = split_halves(data, seed)
    return (
        misclassified(report.classifier, h.first) / h.first.n,
        misclassified(report.classifier, h.second) / h.second.n,
    )
