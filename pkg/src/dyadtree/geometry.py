"""Dyadic cube arithmetic and hyperplane side tests on the unit cube [0,1]^d.

Cubes are addressed by ``(level, index)`` with integer indices, so they are
exact, hashable and cheap to compare. A level-``j`` cube with index ``k`` is
the half-open box ``prod_i [k_i 2^-j, (k_i+1) 2^-j)``; faces lying on the
coordinate value 1 are closed so that every partition by cubes covers the
whole closed domain.
"""

from __future__ import annotations

from dataclasses import dataclass
from itertools import product
from typing import Sequence

import numpy as np

DEFAULT_JMAX = 16


class DimensionError(ValueError):
    pass


@dataclass(frozen=True, order=True)
class DyadicCube:
    level: int
    index: tuple[int, ...]

    def __post_init__(self):
        if self.level < 0:
            raise ValueError(f"negative level {self.level}")
        side = 1 << self.level
        for k in self.index:
            if not 0 <= k < side:
                raise ValueError(f"index {self.index} out of range at level {self.level}")

    @classmethod
    def root(cls, d: int) -> "DyadicCube":
        return cls(0, (0,) * d)

    @property
    def dim(self) -> int:
        return len(self.index)

    @property
    def width(self) -> float:
        return 2.0 ** -self.level

    def lower(self) -> np.ndarray:
        return np.asarray(self.index, dtype=float) * self.width

    def upper(self) -> np.ndarray:
        return (np.asarray(self.index, dtype=float) + 1.0) * self.width

    def parent(self) -> "DyadicCube":
        if self.level == 0:
            raise ValueError("the root cube has no parent")
        return DyadicCube(self.level - 1, tuple(k >> 1 for k in self.index))

    def children(self) -> list["DyadicCube"]:
        return children(self)

    def contains(self, p: Sequence[float]) -> bool:
        return cube_contains(self, p)

    def key(self) -> int:
        """Integer key unique among cubes of the same level and dimension."""
        return cube_key(self.index, self.level)

    def volume(self) -> float:
        return self.width ** self.dim


def cube_key(index: Sequence[int], level: int) -> int:
    key = 0
    for k in index:
        key = (key << level) | int(k)
    return key


def children(cube: DyadicCube) -> list[DyadicCube]:
    """The 2^d subcubes of ``cube`` in lexicographic index order."""
    base = [2 * k for k in cube.index]
    return [
        DyadicCube(cube.level + 1, tuple(b + o for b, o in zip(base, bits)))
        for bits in product((0, 1), repeat=cube.dim)
    ]


def _check_point(p, d: int) -> np.ndarray:
    p = np.asarray(p, dtype=float).reshape(-1)
    if p.shape[0] != d:
        raise DimensionError(f"point has dimension {p.shape[0]}, expected {d}")
    return p


def cube_contains(cube: DyadicCube, p: Sequence[float]) -> bool:
    p = _check_point(p, cube.dim)
    lo, hi = cube.lower(), cube.upper()
    for x, a, b in zip(p, lo, hi):
        if x < a:
            return False
        if x >= b and not (b == 1.0 and x == 1.0):
            return False
    return True


def grid_coords(X: np.ndarray, level: int) -> np.ndarray:
    """Integer index of the level-``level`` cube holding each row of ``X``.

    Scaling by a power of two is exact in binary floating point, so the
    floor is the exact dyadic cell; coordinate 1 is folded into the last cell.
    """
    X = np.asarray(X, dtype=float)
    side = 1 << level
    g = np.floor(X * float(side)).astype(np.int64)
    np.clip(g, 0, side - 1, out=g)
    return g


def locate(p: Sequence[float], level: int) -> DyadicCube:
    if level < 0:
        raise ValueError("level must be nonnegative")
    p = np.asarray(p, dtype=float).reshape(1, -1)
    if np.any((p < 0) | (p > 1)):
        raise ValueError(f"point {p.ravel()} lies outside [0,1]^d")
    g = grid_coords(p, level)[0]
    return DyadicCube(level, tuple(int(k) for k in g))


@dataclass(frozen=True)
class Hyperplane:
    """Affine hyperplane ``<normal, x> = offset``.

    Points with ``<normal, x> - offset <= 0`` are on side 0, the rest on side 1.
    """

    normal: tuple[float, ...]
    offset: float

    def __post_init__(self):
        if not any(c != 0.0 for c in self.normal):
            raise ValueError("hyperplane normal must be nonzero")

    @property
    def dim(self) -> int:
        return len(self.normal)

    def flipped(self) -> "Hyperplane":
        return Hyperplane(tuple(-c for c in self.normal), -self.offset)

    def value(self, X: np.ndarray) -> np.ndarray:
        X = np.asarray(X, dtype=float)
        if X.ndim == 1:
            X = X.reshape(1, -1)
        if X.shape[1] != self.dim:
            raise DimensionError(f"points have dimension {X.shape[1]}, hyperplane {self.dim}")
        return affine_values(np.asarray(self.normal, dtype=float), self.offset, X)

    def sides(self, X: np.ndarray) -> np.ndarray:
        return (self.value(X) > 0).astype(np.int8)


def affine_values(normal, offset, X: np.ndarray) -> np.ndarray:
    """``<normal, x> - offset`` accumulated axis by axis in a fixed order.

    ``normal`` and ``offset`` may carry leading batch axes; broadcasting never
    changes the floating-point result, so the same hyperplane always yields
    bit-identical values whether evaluated alone or in a batch.
    """
    normal = np.asarray(normal, dtype=float)
    offset = np.asarray(offset, dtype=float)
    d = X.shape[-1]
    acc = normal[..., 0, None] * X[:, 0]
    for i in range(1, d):
        acc = acc + normal[..., i, None] * X[:, i]
    return acc - offset[..., None]


def side_of(h: Hyperplane, p: Sequence[float]) -> int:
    p = _check_point(p, h.dim)
    return int(h.sides(p.reshape(1, -1))[0])


@dataclass(frozen=True)
class HCell:
    """A cube, or its intersection with one side of a hyperplane."""

    cube: DyadicCube
    cut: Hyperplane | None = None
    side: int = 0

    def __post_init__(self):
        if self.side not in (0, 1):
            raise ValueError("side must be 0 or 1")
        if self.cut is not None and self.cut.dim != self.cube.dim:
            raise DimensionError("cut and cube dimensions differ")

    def contains(self, p: Sequence[float]) -> bool:
        if not cube_contains(self.cube, p):
            return False
        return self.cut is None or side_of(self.cut, p) == self.side
