"""Hyperplane-decorated leaves: best H-cell per cube and the decorated DP.

Candidate cuts are hyperplanes through ``d`` samples of the cube. The
samples lying on such a plane can end up on either side: for each of the
``2^d`` assignments of the defining samples the plane is tilted by a tiny
amount so that the assignment holds exactly while every other sample keeps
its side. Each resulting concrete hyperplane contributes its two sides, so
every sample split achievable by a half-space is reached, and the
hyperplane stored in the model classifies the training points exactly as
scored here.
"""

from __future__ import annotations

from dataclasses import dataclass
from fractions import Fraction
from itertools import combinations, product

import numpy as np

from .dp import EnergyTable, compute_energy, extract_tree
from .empirical import SetClassifier
from .forest import OccupancyForest
from .geometry import DyadicCube, HCell, Hyperplane, affine_values

MAX_DECORATED_DIM = 3
TILT_CAP = 1e-9
_ON_PLANE_TOL = 1e-12
_CHUNK_ELEMS = 1 << 22


class DecorationDimensionError(ValueError):
    pass


@dataclass(frozen=True)
class DecorationResult:
    cube: DyadicCube
    gamma0_numerator: int
    n: int
    cell: HCell | None  # None: empty decoration
    candidate_count: int

    @property
    def gamma0(self) -> Fraction:
        return Fraction(self.gamma0_numerator, self.n)

    @property
    def best(self) -> tuple[Hyperplane, int] | None:
        if self.cell is None or self.cell.cut is None:
            return None
        return self.cell.cut, self.cell.side


def _check_dim(d: int) -> None:
    if d > MAX_DECORATED_DIM:
        raise DecorationDimensionError(f"decoration supports d <= {MAX_DECORATED_DIM}, got d={d}")


def _plane_through(P: np.ndarray) -> tuple[np.ndarray, np.ndarray]:
    """Normals and offsets of planes through each row-block of ``P`` (S, d, d)."""
    d = P.shape[-1]
    if d == 1:
        normals = np.ones((P.shape[0], 1))
    elif d == 2:
        diff = P[:, 1] - P[:, 0]
        normals = np.stack([-diff[:, 1], diff[:, 0]], axis=1)
    else:
        normals = np.cross(P[:, 1] - P[:, 0], P[:, 2] - P[:, 0])
    offsets = normals[:, 0] * P[:, 0, 0]
    for i in range(1, d):
        offsets = offsets + normals[:, i] * P[:, 0, i]
    return normals, offsets


@dataclass
class _Candidates:
    defining: np.ndarray  # (S, k) positions within the cube's sample list
    normals: np.ndarray  # (S, d)
    offsets: np.ndarray  # (S,)


def _candidates(Xq: np.ndarray) -> _Candidates:
    nq, d = Xq.shape
    if nq >= d:
        subsets = np.array(list(combinations(range(nq), d)), dtype=np.int64).reshape(-1, d)
        normals, offsets = _plane_through(Xq[subsets])
        ok = np.max(np.abs(normals), axis=1) > _ON_PLANE_TOL
        if ok.any():
            return _Candidates(subsets[ok], normals[ok], offsets[ok])
    # axis-aligned planes through every sample coordinate
    rows = [(i, a) for i in range(nq) for a in range(d)]
    defining = np.array([[i] for i, _ in rows], dtype=np.int64)
    normals = np.zeros((len(rows), d))
    normals[np.arange(len(rows)), [a for _, a in rows]] = 1.0
    offsets = np.array([Xq[i, a] for i, a in rows])
    return _Candidates(defining, normals, offsets)


def candidate_hyperplanes(cube: DyadicCube, forest: OccupancyForest) -> list[Hyperplane]:
    """Hyperplanes through each affinely independent d-subset of the cube's samples."""
    _check_dim(forest.d)
    idx = np.sort(forest.indices(cube))
    if idx.size == 0:
        return []
    c = _candidates(forest.data.X[idx])
    return [Hyperplane(tuple(float(v) for v in nrm), float(off)) for nrm, off in zip(c.normals, c.offsets)]


def _tilted(c: _Candidates, Xq: np.ndarray) -> tuple[np.ndarray, np.ndarray]:
    """Concrete normals (S, P, d) and offsets (S, P) realizing every on-plane assignment."""
    S, k = c.defining.shape
    d = Xq.shape[1]
    patterns = np.array(list(product((-1.0, 1.0), repeat=k)))  # (P, k)
    P = len(patterns)
    if k == 1:
        # f(x) = s: shift the offset only
        u = np.zeros((S, P, d))
        v = np.broadcast_to(-patterns[:, 0], (S, P)).copy()
    else:
        A = np.concatenate([Xq[c.defining], -np.ones((S, k, 1))], axis=2)  # (S, k, d+1)
        coef = np.linalg.pinv(A) @ patterns.T  # (S, d+1, P)
        u = np.transpose(coef[:, :d, :], (0, 2, 1))
        v = coef[:, d, :]
    g = affine_values(c.normals, c.offsets, Xq)  # (S, N)
    f = affine_values(u, v, Xq)  # (S, P, N)
    scale = np.sum(np.abs(c.normals), axis=1, keepdims=True)
    on_plane = np.abs(g) <= _ON_PLANE_TOL * scale
    on_plane[np.arange(S)[:, None], c.defining] = True
    absf = np.abs(f)
    with np.errstate(divide="ignore", invalid="ignore"):
        ratio = np.where(on_plane[:, None, :] | (absf == 0), np.inf, np.abs(g)[:, None, :] / absf)
    eps = np.minimum(TILT_CAP, 0.5 * ratio.min(axis=2))  # (S, P)
    gdef = np.take_along_axis(g, c.defining, axis=1)  # (S, k)
    already = np.all((gdef[:, None, :] > 0) == (patterns[None, :, :] > 0), axis=2)
    eps = np.where(already, 0.0, eps)
    normals = c.normals[:, None, :] + eps[..., None] * u
    offsets = c.offsets[:, None] + eps * v
    return normals, offsets


def _score_generic(Xq: np.ndarray, yq: np.ndarray):
    c = _candidates(Xq)
    S = len(c.offsets)
    total = int(yq.sum())
    best_val, best = None, None
    per = max(1, _CHUNK_ELEMS // max(1, (1 << c.defining.shape[1]) * len(yq)))
    for lo in range(0, S, per):
        sl = slice(lo, min(S, lo + per))
        sub = _Candidates(c.defining[sl], c.normals[sl], c.offsets[sl])
        normals, offsets = _tilted(sub, Xq)
        V = affine_values(normals, offsets, Xq)  # (s, P, N)
        s1 = ((V > 0) * yq).sum(axis=2)
        scores = np.stack([total - s1, s1], axis=2)  # side 0, side 1
        flat = int(np.argmax(scores))
        val = int(scores.reshape(-1)[flat])
        if best_val is None or val > best_val:
            si, pi, side = np.unravel_index(flat, scores.shape)
            best_val = val
            best = (normals[si, pi], offsets[si, pi], int(side))
    return best_val, best, S


def _score_1d(Xq: np.ndarray, yq: np.ndarray):
    """Same candidates and order as the generic path, scored by sorting."""
    x = Xq[:, 0]
    order = np.argsort(x, kind="stable")
    xs = x[order]
    csum = np.concatenate([[0], np.cumsum(yq[order])])
    total = int(csum[-1])
    # tilt for putting the sample itself on side 1
    lo_nb = np.searchsorted(xs, x - _ON_PLANE_TOL, side="left") - 1
    hi_nb = np.searchsorted(xs, x + _ON_PLANE_TOL, side="right")
    below = np.where(lo_nb >= 0, x - xs[np.clip(lo_nb, 0, None)], np.inf)
    above = np.where(hi_nb < len(xs), xs[np.clip(hi_nb, None, len(xs) - 1)] - x, np.inf)
    eps = np.minimum(TILT_CAP, 0.5 * np.minimum(below, above))
    offs = np.stack([x, x - eps], axis=1)  # patterns s = -1, +1
    n_le = np.searchsorted(xs, offs, side="right")
    s0 = csum[n_le]
    scores = np.stack([s0, total - s0], axis=2)
    flat = int(np.argmax(scores))
    si, pi, side = np.unravel_index(flat, scores.shape)
    return int(scores.reshape(-1)[flat]), (np.ones(1), offs[si, pi], int(side)), len(x)


def best_hcell(cube: DyadicCube, forest: OccupancyForest, fast: bool = True) -> DecorationResult:
    """Largest clamped label sum over the empty set, the cube, and its H-cells.

    Ties go to the full cube, then to the first candidate in order
    (sample order, tilt pattern, side 0 before side 1).
    """
    d = forest.d
    _check_dim(d)
    idx = np.sort(forest.indices(cube))
    n = forest.n
    if idx.size == 0:
        return DecorationResult(cube, 0, n, None, 0)
    Xq, yq = forest.data.X[idx], forest.data.y[idx]
    full = int(yq.sum())
    if d == 1 and fast:
        val, arg, count = _score_1d(Xq, yq)
    else:
        val, arg, count = _score_generic(Xq, yq)
    best_val, cell = 0, None
    if full > best_val:
        best_val, cell = full, HCell(cube)
    if val > best_val:
        normal, offset, side = arg
        h = Hyperplane(tuple(float(t) for t in normal), float(offset))
        best_val, cell = val, HCell(cube, h, side)
    return DecorationResult(cube, best_val, n, cell, count)


def decorated_energy(forest: OccupancyForest, m_max: int) -> EnergyTable:
    """Energy table whose leaf values are the best H-cell energies."""
    _check_dim(forest.d)
    results = {q: best_hcell(q, forest) for q in forest.occupied()}
    table = compute_energy(forest, m_max, {q: r.gamma0_numerator for q, r in results.items()})
    table.algorithm = "decorated"
    table.decorations = results
    return table


def extract_decorated_classifier(table: EnergyTable, m: int) -> SetClassifier:
    if table.algorithm != "decorated":
        raise ValueError("table was not built by decorated_energy")
    tree = extract_tree(table, m)
    positive, decorations = [], {}
    for q in tree.leaves():
        r = table.decorations.get(q)
        if r is None or r.gamma0_numerator <= 0:
            continue
        if r.cell.cut is None:
            positive.append(q)
        else:
            decorations[q] = r.cell
    return SetClassifier(tree, positive, decorations, algorithm="decorated", m=m)
