"""Empirical measures, empirical risk and set classifiers.

Every empirical quantity is an integer numerator over the sample size ``n``;
``label_sum`` / ``count_in`` / ``misclassified`` return those integers and
the float versions only divide at the end, so ties compare exactly.
"""

from __future__ import annotations

import math
from dataclasses import dataclass, field
from typing import Iterable, Protocol, Sequence

import numpy as np

from .data import Dataset
from .forest import CompleteTree, OccupancyForest
from .geometry import DimensionError, DyadicCube, HCell, cube_key, grid_coords


class UnsupportedRegion(TypeError):
    pass


class Region(Protocol):
    dim: int

    def contains_many(self, X: np.ndarray) -> np.ndarray: ...


def _points(X, d: int) -> np.ndarray:
    X = np.asarray(X, dtype=float)
    if X.ndim == 1:
        X = X.reshape(1, -1) if d > 1 or X.size == 1 else X.reshape(-1, 1)
    if X.shape[1] != d:
        raise DimensionError(f"points have dimension {X.shape[1]}, expected {d}")
    return X


def _in_box(X: np.ndarray, lower: np.ndarray, upper: np.ndarray) -> np.ndarray:
    above = np.all(X >= lower, axis=1)
    below = np.all((X < upper) | ((upper == 1.0) & (X == 1.0)), axis=1)
    return above & below


@dataclass(frozen=True)
class Box:
    """Half-open box ``[lower, upper)``, closed on faces at coordinate 1."""

    lower: tuple[float, ...]
    upper: tuple[float, ...]

    @property
    def dim(self) -> int:
        return len(self.lower)

    def contains_many(self, X) -> np.ndarray:
        X = _points(X, self.dim)
        return _in_box(X, np.asarray(self.lower), np.asarray(self.upper))

    def boxes(self) -> list[tuple[np.ndarray, np.ndarray]]:
        return [(np.asarray(self.lower, float), np.asarray(self.upper, float))]


@dataclass(frozen=True)
class BoxUnion:
    """Union of pairwise disjoint boxes; the empty union is the empty set."""

    dim: int
    parts: tuple[Box, ...] = ()

    def contains_many(self, X) -> np.ndarray:
        X = _points(X, self.dim)
        out = np.zeros(X.shape[0], dtype=bool)
        for b in self.parts:
            out |= _in_box(X, np.asarray(b.lower), np.asarray(b.upper))
        return out

    def boxes(self) -> list[tuple[np.ndarray, np.ndarray]]:
        return [bx for b in self.parts for bx in b.boxes()]


def interval(a: float, b: float) -> BoxUnion:
    return BoxUnion(1, (Box((a,), (b,)),))


def empty_set(d: int) -> BoxUnion:
    return BoxUnion(d)


def full_domain(d: int) -> BoxUnion:
    return BoxUnion(d, (Box((0.0,) * d, (1.0,) * d),))


class SetClassifier:
    """Union of (possibly hyperplane-cut) leaves of a complete tree.

    Plain form: ``positive`` lists leaves contained in the set. Decorated
    form additionally maps leaves to an ``HCell`` whose cut side is in the set.
    """

    def __init__(
        self,
        tree: CompleteTree,
        positive: Iterable[DyadicCube] = (),
        decorations: dict[DyadicCube, HCell] | None = None,
        algorithm: str = "plain",
        m: int | None = None,
    ):
        self.tree = tree
        self.dim = tree.d
        self.positive = frozenset(positive)
        self.decorations = dict(decorations or {})
        self.algorithm = algorithm
        self.m = m
        leafset = set(tree.leaves())
        if not self.positive <= leafset:
            raise ValueError("positive cubes must be leaves of the tree")
        for q, cell in self.decorations.items():
            if q not in leafset or cell.cube != q:
                raise ValueError(f"decoration of {q} does not sit on that leaf")
            if q in self.positive:
                raise ValueError(f"leaf {q} is both fully positive and decorated")
        self._depth = tree.depth()
        self._pos_keys = self._keys_by_level(self.positive)
        self._leaf_keys = self._keys_by_level(leafset)
        self._dec_by_level: dict[int, dict[int, HCell]] = {}
        for q, cell in self.decorations.items():
            self._dec_by_level.setdefault(q.level, {})[q.key()] = cell

    @staticmethod
    def _keys_by_level(cubes) -> dict[int, np.ndarray]:
        out: dict[int, list[int]] = {}
        for q in cubes:
            out.setdefault(q.level, []).append(q.key())
        return {j: np.array(sorted(v), dtype=np.int64) for j, v in out.items()}

    @property
    def decorated(self) -> bool:
        return bool(self.decorations)

    def _point_keys(self, X: np.ndarray, level: int) -> np.ndarray:
        g = grid_coords(X, level)
        key = np.zeros(X.shape[0], dtype=np.int64)
        for i in range(self.dim):
            key = (key << level) | g[:, i]
        return key

    def contains_many(self, X) -> np.ndarray:
        X = _points(X, self.dim)
        out = np.zeros(X.shape[0], dtype=bool)
        todo = np.ones(X.shape[0], dtype=bool)
        for j in range(self._depth + 1):
            if j not in self._leaf_keys:
                continue
            keys = self._point_keys(X, j)
            here = todo & np.isin(keys, self._leaf_keys[j])
            if not here.any():
                continue
            todo &= ~here
            if j in self._pos_keys:
                out |= here & np.isin(keys, self._pos_keys[j])
            for key, cell in self._dec_by_level.get(j, {}).items():
                sel = np.flatnonzero(here & (keys == key))
                if sel.size:
                    out[sel] = cell.cut.sides(X[sel]) == cell.side
        return out

    def contains(self, p) -> bool:
        return bool(self.contains_many(np.asarray(p, dtype=float).reshape(1, -1))[0])

    def positive_leaves(self) -> list[DyadicCube]:
        return sorted(self.positive | set(self.decorations))

    def boxes(self) -> list[tuple[np.ndarray, np.ndarray]]:
        """Disjoint boxes making up the set, up to boundaries of measure zero."""
        out = [(q.lower(), q.upper()) for q in sorted(self.positive)]
        if self.decorations and self.dim != 1:
            raise UnsupportedRegion("decorated sets in d >= 2 have no box decomposition")
        for q, cell in sorted(self.decorations.items()):
            a, b = q.lower()[0], q.upper()[0]
            nrm, c = cell.cut.normal[0], cell.cut.offset
            t = min(max(c / nrm, a), b)
            # side 0 is {nrm * x <= c}
            lower_part = (cell.side == 0) == (nrm > 0)
            lo, hi = (a, t) if lower_part else (t, b)
            if hi > lo:
                out.append((np.array([lo]), np.array([hi])))
        return out


@dataclass(frozen=True)
class GridClassifier:
    """Union of cells of the uniform ``l^d`` grid (the nonadaptive baseline)."""

    dim: int
    l: int
    positive: frozenset = field(default_factory=frozenset)

    def cells_of(self, X) -> np.ndarray:
        X = _points(X, self.dim)
        g = np.floor(X * self.l).astype(np.int64)
        np.clip(g, 0, self.l - 1, out=g)
        return g

    def contains_many(self, X) -> np.ndarray:
        g = self.cells_of(X)
        if not self.positive:
            return np.zeros(g.shape[0], dtype=bool)
        codes = np.ravel_multi_index(g.T, (self.l,) * self.dim)
        pos = np.array([np.ravel_multi_index(c, (self.l,) * self.dim) for c in self.positive])
        return np.isin(codes, pos)

    def contains(self, p) -> bool:
        return bool(self.contains_many(np.asarray(p, dtype=float).reshape(1, -1))[0])

    def boxes(self) -> list[tuple[np.ndarray, np.ndarray]]:
        return [
            (np.asarray(c, float) / self.l, (np.asarray(c, float) + 1) / self.l)
            for c in sorted(self.positive)
        ]


def as_region(S, d: int):
    """Coerce cubes, H-cells, sequences of those, or ``None`` into a region."""
    if S is None:
        return empty_set(d)
    if isinstance(S, DyadicCube):
        return BoxUnion(d, (Box(tuple(S.lower()), tuple(S.upper())),))
    if isinstance(S, HCell):
        return _HCellRegion(S)
    if hasattr(S, "contains_many"):
        if S.dim != d:
            raise DimensionError(f"region has dimension {S.dim}, data {d}")
        return S
    if isinstance(S, (list, tuple, set, frozenset)):
        return _Union([as_region(s, d) for s in S], d)
    raise TypeError(f"cannot interpret {type(S).__name__} as a region")


@dataclass(frozen=True)
class _HCellRegion:
    cell: HCell

    @property
    def dim(self) -> int:
        return self.cell.cube.dim

    def contains_many(self, X) -> np.ndarray:
        X = _points(X, self.dim)
        q = self.cell.cube
        inside = _in_box(X, q.lower(), q.upper())
        if self.cell.cut is not None:
            inside &= self.cell.cut.sides(X) == self.cell.side
        return inside


@dataclass(frozen=True)
class _Union:
    parts: list
    dim: int

    def contains_many(self, X) -> np.ndarray:
        X = _points(X, self.dim)
        out = np.zeros(X.shape[0], dtype=bool)
        for p in self.parts:
            out |= p.contains_many(X)
        return out


def membership(S, data: Dataset) -> np.ndarray:
    return as_region(S, data.d).contains_many(data.X)


def label_sum(S, data: Dataset) -> int:
    """n times the empirical eta-bar of ``S``."""
    return int(data.y[membership(S, data)].sum())


def count_in(S, data: Dataset) -> int:
    return int(np.count_nonzero(membership(S, data)))


def misclassified(S, data: Dataset) -> int:
    pred = np.where(membership(S, data), 1, -1)
    return int(np.count_nonzero(pred != data.y))


def eta_bar(S, data: Dataset) -> float:
    return label_sum(S, data) / data.n


def rho_bar(S, data: Dataset) -> float:
    return count_in(S, data) / data.n


def empirical_risk(S, data: Dataset) -> float:
    return misclassified(S, data) / data.n


def forest_label_sum(cubes: Sequence[DyadicCube], forest: OccupancyForest) -> int:
    """Label sum of a disjoint union of cubes of T(z), from cached sums."""
    return sum(forest.label_sum(q) for q in cubes)


def epsilon_vc(V: int, n: int, r: float, A: float) -> float:
    """``A max(r+1, V) log(n) / n``."""
    if n < 2 or V < 1 or r <= 0 or A <= 0:
        raise ValueError("need n >= 2, V >= 1, r > 0, A > 0")
    return A * max(r + 1, V) * math.log(n) / n


def epsilon_finite(class_size: int, n: int, r: float) -> float:
    """``10 (log #S + r log n) / (3n)`` for a finite class of size ``class_size``."""
    if class_size < 1 or n < 2 or r <= 0:
        raise ValueError("need class_size >= 1, n >= 2, r > 0")
    return 10.0 * (math.log(class_size) + r * math.log(n)) / (3.0 * n)
