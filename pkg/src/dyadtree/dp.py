"""Budgeted energy maximization over complete subtrees of T(z).

For an occupied cube Q and budget j, ``gamma[Q][j]`` is the largest energy
(sum over leaves of max(0, label sum)) reachable with at most j refinements
below and including Q. Refining Q costs one unit and the remaining ``j - 1``
units are shared among its occupied children through a max-plus
convolution. Values are integer numerators over the sample size ``n``.

Arrays are truncated at the saturation budget of each cube (its number of
refinable descendants, itself included), so the work is that of a tree
knapsack rather than ``m_max`` squared per cube.
"""

from __future__ import annotations

from dataclasses import dataclass, field
from fractions import Fraction
from typing import Callable

import numpy as np

from .empirical import SetClassifier, _in_box
from .forest import CompleteTree, OccupancyForest, iter_subtrees, DEFAULT_ENUM_LIMIT
from .geometry import DyadicCube

_NEG = np.iinfo(np.int64).min // 4


def maxplus_convolve(a: np.ndarray, s: np.ndarray, size: int) -> tuple[np.ndarray, np.ndarray]:
    """``out[b] = max_l a[l] + s[b - l]`` for ``b < size``, with the smallest maximizing ``l``."""
    p, q = len(a), len(s)
    L = min(p + q - 1, size)
    out = np.full(L, _NEG, dtype=np.int64)
    arg = np.zeros(L, dtype=np.int64)
    if p <= q:
        for l in range(min(p, L)):
            hi = min(q, L - l)
            cand = a[l] + s[:hi]
            seg = out[l:l + hi]
            better = cand > seg
            seg[better] = cand[better]
            arg[l:l + hi][better] = l
    else:
        # walking r downwards visits l = b - r upwards for every b
        ls = np.arange(p)
        for r in range(min(q, L) - 1, -1, -1):
            hi = min(p, L - r)
            cand = a[:hi] + s[r]
            seg = out[r:r + hi]
            better = cand > seg
            seg[better] = cand[better]
            arg[r:r + hi][better] = ls[:hi][better]
    return out, arg


@dataclass
class _Split:
    children: list[DyadicCube]
    args: list[np.ndarray]  # args[i][b]: budget of children[i] when children[i:] share b


@dataclass
class EnergyTable:
    forest: OccupancyForest
    m_max: int
    leaf_energy: dict[DyadicCube, int]
    gamma: dict[DyadicCube, np.ndarray] = field(repr=False)
    split: dict[DyadicCube, np.ndarray] = field(repr=False)
    alloc: dict[DyadicCube, _Split] = field(repr=False)
    algorithm: str = "plain"
    decorations: dict = field(default_factory=dict, repr=False)

    @property
    def n(self) -> int:
        return self.forest.n

    @property
    def root(self) -> DyadicCube:
        return self.forest.root

    def gamma_numerator(self, q: DyadicCube, j: int) -> int:
        g = self.gamma.get(q)
        if g is None:
            return 0
        return int(g[min(j, len(g) - 1)])

    def energy(self, m: int) -> Fraction:
        return Fraction(self.gamma_numerator(self.root, m), self.n)

    def energies(self) -> list[Fraction]:
        return [self.energy(m) for m in range(self.m_max + 1)]

    def saturation(self) -> int:
        """Smallest budget beyond which the root energy no longer changes."""
        g = self.gamma[self.root]
        return int(np.flatnonzero(g == g[-1])[0])

    def chosen_budgets(self, q: DyadicCube, j: int) -> list[tuple[DyadicCube, int]]:
        sp = self.alloc[q]
        b = j - 1
        out = []
        last = len(sp.children) - 1
        for i, c in enumerate(sp.children):
            l = b if i == last else int(sp.args[i][b])
            out.append((c, l))
            b -= l
        return out

    def refines(self, q: DyadicCube, j: int) -> bool:
        sp = self.split.get(q)
        if sp is None:
            return False
        return bool(sp[min(j, len(sp) - 1)])

    def leaf_sums_all_m(self, values: dict[DyadicCube, int], bonus: int = 0, m_top: int | None = None) -> np.ndarray:
        """For every m, the sum of ``values`` over leaves of T(X, m).

        Every refined cube additionally adds ``bonus``, so ``values={}`` with
        ``bonus=1`` counts refinements. Cubes missing from ``values`` count 0.
        """
        m_top = self.m_max if m_top is None else m_top
        psi: dict[DyadicCube, np.ndarray] = {}
        for q in self.forest.bottom_up():
            v = int(values.get(q, 0))
            g = self.gamma[q]
            arr = np.full(len(g), v, dtype=np.int64)
            if q in self.alloc and len(g) > 1:
                sp = self.alloc[q]
                b = np.arange(len(g) - 1)
                acc = np.full(len(g) - 1, bonus, dtype=np.int64)
                last = len(sp.children) - 1
                for i, c in enumerate(sp.children):
                    l = b if i == last else sp.args[i][b]
                    pc = psi[c]
                    acc += pc[np.minimum(l, len(pc) - 1)]
                    b = b - l
                arr[1:] = np.where(self.split[q][1:], acc, v)
            psi[q] = arr
        root = psi[self.root]
        return root[np.minimum(np.arange(m_top + 1), len(root) - 1)]


def compute_energy(
    forest: OccupancyForest,
    m_max: int,
    leaf_energy: dict[DyadicCube, int] | None = None,
) -> EnergyTable:
    """Fill the energy table for every occupied cube and every budget up to ``m_max``.

    ``leaf_energy`` overrides the value of a cube kept as a leaf (default
    ``max(0, label sum)``); the decorated variant passes H-cell energies here.
    """
    if m_max < 0:
        raise ValueError("m_max must be nonnegative")
    if leaf_energy is None:
        leaf_energy = {q: max(0, forest.label_sum(q)) for q in forest.occupied()}
    gamma: dict[DyadicCube, np.ndarray] = {}
    split: dict[DyadicCube, np.ndarray] = {}
    alloc: dict[DyadicCube, _Split] = {}
    for q in forest.bottom_up():
        g0 = int(leaf_energy[q])
        kids = forest.occupied_children(q)
        if not kids or m_max == 0:
            gamma[q] = np.array([g0], dtype=np.int64)
            split[q] = np.zeros(1, dtype=bool)
            continue
        # children share at most m_max - 1 units
        size = m_max
        suf = gamma[kids[-1]][:size]
        args: list[np.ndarray] = [np.empty(0, dtype=np.int64)] * len(kids)
        for i in range(len(kids) - 2, -1, -1):
            suf, args[i] = maxplus_convolve(gamma[kids[i]][:size], suf, size)
        g = np.empty(len(suf) + 1, dtype=np.int64)
        g[0] = g0
        g[1:] = np.maximum(suf, g0)
        sp = np.zeros(len(g), dtype=bool)
        sp[1:] = suf > g0
        gamma[q], split[q] = g, sp
        alloc[q] = _Split(kids, args)
    return EnergyTable(forest, m_max, dict(leaf_energy), gamma, split, alloc)


def _refined_set(table: EnergyTable, q: DyadicCube, j: int, out: set) -> None:
    if not table.refines(q, j):
        return
    out.add(q)
    j = min(j, len(table.gamma[q]) - 1)
    for c, l in table.chosen_budgets(q, j):
        _refined_set(table, c, l, out)


def extract_tree(table: EnergyTable, m: int) -> CompleteTree:
    """The optimal tree T(X, m); ties keep cubes unrefined."""
    if not 0 <= m <= table.m_max:
        raise ValueError(f"m={m} outside 0..{table.m_max}")
    refined: set[DyadicCube] = set()
    _refined_set(table, table.root, m, refined)
    return CompleteTree.from_refined(refined, table.forest.d)


def leaf_energy_of(tree: CompleteTree, table: EnergyTable) -> int:
    return sum(table.leaf_energy.get(q, 0) for q in tree.leaves())


def extract_classifier(table: EnergyTable, m: int) -> SetClassifier:
    """Union of the leaves of T(X, m) with strictly positive label sum."""
    tree = extract_tree(table, m)
    forest = table.forest
    positive = [q for q in tree.leaves() if forest.label_sum(q) > 0]
    return SetClassifier(tree, positive, algorithm="plain", m=m)


def _scan_label_sum(q: DyadicCube, forest: OccupancyForest) -> int:
    data = forest.data
    return int(data.y[_in_box(data.X, q.lower(), q.upper())].sum())


def brute_force_energy(
    forest: OccupancyForest,
    m: int,
    leaf_value: Callable[[DyadicCube], int] | None = None,
    limit: int = DEFAULT_ENUM_LIMIT,
) -> Fraction:
    """Best energy over every complete subtree with at most ``m`` refinements.

    Leaf label sums are recomputed by scanning the raw sample, independently
    of the forest's cached sums.
    """
    if leaf_value is None:
        def leaf_value(q):
            return max(0, _scan_label_sum(q, forest))
    cache: dict[DyadicCube, int] = {}
    best = 0
    for tree in iter_subtrees(forest, m, limit):
        total = 0
        for q in tree.leaves():
            if q not in cache:
                cache[q] = leaf_value(q)
            total += cache[q]
        best = max(best, total)
    return Fraction(best, forest.n)
