"""Occupancy tree of a sample and its sibling completion.

Starting from the root cube, every cube holding at least ``min_split``
samples (default 2) is refined into its ``2^d`` children until ``j_max``.
Refining a cube with at most one sample never changes the energy of any
subtree below it, so the default gives the same optimal energies as the
nominal depth-``n/2`` construction with far fewer cubes.
"""

from __future__ import annotations

from dataclasses import dataclass, field
from typing import Iterable, Iterator

import numpy as np

from .data import Dataset, DataError
from .geometry import DEFAULT_JMAX, DimensionError, DyadicCube, grid_coords

MAX_KEY_BITS = 62
DEFAULT_ENUM_LIMIT = 10**6


class CompleteTree:
    """A finite set of dyadic cubes closed under parents and siblings."""

    def __init__(self, cubes: Iterable[DyadicCube], d: int | None = None, validate: bool = True):
        self.cubes = frozenset(cubes)
        if d is None:
            d = next(iter(self.cubes)).dim if self.cubes else None
        if d is None:
            raise ValueError("cannot infer the dimension of an empty tree")
        self.d = d
        self.root = DyadicCube.root(d)
        if validate:
            self._validate()

    @classmethod
    def from_refined(cls, refined: Iterable[DyadicCube], d: int) -> "CompleteTree":
        cubes = {DyadicCube.root(d)}
        for q in refined:
            cubes.update(q.children())
        return cls(cubes, d)

    def _validate(self) -> None:
        if self.root not in self.cubes:
            raise ValueError("tree has no root")
        for q in self.cubes:
            if q.dim != self.d:
                raise DimensionError("mixed cube dimensions")
            if q.level == 0:
                continue
            parent = q.parent()
            if parent not in self.cubes:
                raise ValueError(f"{q} present without its parent")
            for sib in parent.children():
                if sib not in self.cubes:
                    raise ValueError(f"{q} present without sibling {sib}")

    def __contains__(self, q: DyadicCube) -> bool:
        return q in self.cubes

    def __len__(self) -> int:
        return len(self.cubes)

    def __eq__(self, other) -> bool:
        return isinstance(other, CompleteTree) and self.cubes == other.cubes

    def __hash__(self) -> int:
        return hash(self.cubes)

    def __repr__(self) -> str:
        return f"CompleteTree(d={self.d}, cubes={len(self.cubes)}, leaves={len(self.leaves())})"

    def is_leaf(self, q: DyadicCube) -> bool:
        return q in self.cubes and q.children()[0] not in self.cubes

    def leaves(self) -> list[DyadicCube]:
        return sorted(q for q in self.cubes if self.is_leaf(q))

    def internal(self) -> list[DyadicCube]:
        return sorted(q for q in self.cubes if not self.is_leaf(q))

    def refinement_count(self) -> int:
        return len(self.internal())

    def ordered(self) -> list[DyadicCube]:
        """Breadth-first order: by level, then by index."""
        return sorted(self.cubes)

    def depth(self) -> int:
        return max(q.level for q in self.cubes)


def leaves(tree: CompleteTree) -> list[DyadicCube]:
    return tree.leaves()


def refinement_count(tree: CompleteTree) -> int:
    return tree.refinement_count()


@dataclass
class CubeStats:
    count: int
    label_sum: int
    indices: np.ndarray
    refined: bool = False

    @property
    def occupied(self) -> bool:
        return self.count > 0


@dataclass
class OccupancyForest:
    data: Dataset
    j_max: int
    min_split: int
    stats: dict[DyadicCube, CubeStats] = field(repr=False)
    tree: CompleteTree = field(repr=False)

    @property
    def d(self) -> int:
        return self.data.d

    @property
    def n(self) -> int:
        return self.data.n

    @property
    def root(self) -> DyadicCube:
        return self.tree.root

    def is_occupied(self, q: DyadicCube) -> bool:
        s = self.stats.get(q)
        return s is not None and s.count > 0

    def is_internal(self, q: DyadicCube) -> bool:
        s = self.stats.get(q)
        return s is not None and s.refined

    def occupied_children(self, q: DyadicCube) -> list[DyadicCube]:
        if not self.is_internal(q):
            return []
        return [c for c in q.children() if self.stats[c].count > 0]

    def occupied(self) -> list[DyadicCube]:
        """Cubes of the occupancy tree, i.e. cubes of T(z) holding a sample."""
        return sorted(q for q, s in self.stats.items() if s.count > 0)

    def internal(self) -> list[DyadicCube]:
        return sorted(q for q, s in self.stats.items() if s.refined)

    def bottom_up(self) -> list[DyadicCube]:
        """Occupied cubes ordered deepest level first."""
        return sorted(self.occupied(), key=lambda q: (-q.level, q.index))

    def label_sum(self, q: DyadicCube) -> int:
        s = self.stats.get(q)
        return 0 if s is None else s.label_sum

    def count(self, q: DyadicCube) -> int:
        s = self.stats.get(q)
        return 0 if s is None else s.count

    def indices(self, q: DyadicCube) -> np.ndarray:
        s = self.stats.get(q)
        return np.empty(0, dtype=np.int64) if s is None else s.indices

    def occupancy_tree(self) -> frozenset[DyadicCube]:
        return frozenset(self.occupied())


def build_forest(data: Dataset, j_max: int = DEFAULT_JMAX, min_split: int = 2) -> OccupancyForest:
    """Build T(z): refine cubes holding ``>= min_split`` samples up to ``j_max``.

    ``min_split=1`` refines every occupied cube down to ``j_max``.
    """
    if not isinstance(data, Dataset):
        data = Dataset.from_samples(data)
    if j_max < 0:
        raise ValueError("j_max must be nonnegative")
    if min_split < 1:
        raise ValueError("min_split must be at least 1")
    d = data.d
    if d * j_max > MAX_KEY_BITS:
        raise ValueError(f"j_max={j_max} too deep for d={d} (d*j_max must be <= {MAX_KEY_BITS})")
    if data.n == 0:
        raise DataError("empty data")

    g = grid_coords(data.X, j_max)
    y = data.y
    root = DyadicCube.root(d)
    all_idx = np.arange(data.n, dtype=np.int64)
    stats: dict[DyadicCube, CubeStats] = {root: CubeStats(data.n, int(y.sum()), all_idx)}
    stack = [root]
    while stack:
        q = stack.pop()
        s = stats[q]
        if s.count < min_split or q.level >= j_max:
            continue
        s.refined = True
        shift = j_max - q.level - 1
        bits = (g[s.indices] >> shift) & 1
        code = np.zeros(s.count, dtype=np.int64)
        for i in range(d):
            code = (code << 1) | bits[:, i]
        for c, child in enumerate(q.children()):
            idx = s.indices[code == c]
            stats[child] = CubeStats(int(idx.size), int(y[idx].sum()), idx)
            if idx.size:
                stack.append(child)
    tree = CompleteTree(stats.keys(), d, validate=False)
    return OccupancyForest(data, j_max, min_split, stats, tree)


def _count_table(forest: OccupancyForest, q: DyadicCube, m: int, memo: dict) -> list[int]:
    """Number of complete subtrees rooted at ``q`` with exactly b refinements."""
    if q in memo:
        return memo[q]
    out = [1] + [0] * m
    if forest.is_internal(q) and m >= 1:
        acc = [1] + [0] * (m - 1)
        for c in q.children():
            ct = _count_table(forest, c, m, memo)
            nxt = [0] * m
            for a, va in enumerate(acc):
                if va:
                    for b in range(m - a):
                        nxt[a + b] += va * ct[b]
            acc = nxt
        for b in range(m):
            out[b + 1] += acc[b]
    memo[q] = out
    return out


def count_subtrees(forest: OccupancyForest, m: int) -> list[int]:
    """Counts of complete subtrees of T(z) with exactly 0..m refinements."""
    return _count_table(forest, forest.root, m, {})


def _enumerate(forest: OccupancyForest, q: DyadicCube, m: int) -> list[list[frozenset]]:
    # result[b] lists the refined-cube sets of subtrees at q using exactly b refinements
    out: list[list[frozenset]] = [[frozenset()]] + [[] for _ in range(m)]
    if not forest.is_internal(q) or m == 0:
        return out
    acc: list[list[frozenset]] = [[frozenset({q})]] + [[] for _ in range(m - 1)]
    for c in q.children():
        sub = _enumerate(forest, c, m - 1)
        nxt: list[list[frozenset]] = [[] for _ in range(m)]
        for a in range(m):
            for left in acc[a]:
                for b in range(m - a):
                    for right in sub[b]:
                        nxt[a + b].append(left | right)
        acc = nxt
    for b in range(m):
        out[b + 1].extend(acc[b])
    return out


def iter_subtrees(forest: OccupancyForest, m: int, limit: int = DEFAULT_ENUM_LIMIT) -> Iterator[CompleteTree]:
    total = sum(count_subtrees(forest, m))
    if total > limit:
        raise OverflowError(f"{total} subtrees with at most {m} refinements exceed the limit {limit}")
    for bucket in _enumerate(forest, forest.root, m):
        for refined in bucket:
            yield CompleteTree.from_refined(refined, forest.d)


def enumerate_subtrees(forest: OccupancyForest, m: int, limit: int = DEFAULT_ENUM_LIMIT) -> list[CompleteTree]:
    """All complete subtrees of T(z) rooted at the domain with at most ``m`` refinements."""
    return list(iter_subtrees(forest, m, limit))
