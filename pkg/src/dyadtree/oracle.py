"""Synthetic distributions with known regression function and Bayes set.

The marginal is uniform on [0,1]^d and the regression function depends on
one axis only, so the excess risk of any set that is a finite union of boxes
has a closed form:

    R(S) - R(Omega*) = int_{Omega*} eta - int_S eta.
"""

from __future__ import annotations

import math
from dataclasses import dataclass
from typing import Sequence

import numpy as np

from .data import Dataset
from .empirical import Box, BoxUnion, UnsupportedRegion, as_region


@dataclass(frozen=True)
class RiskReport:
    value: float
    method: str  # "exact" or "monte-carlo"
    stderr: float | None = None


class DistributionOracle:
    """Uniform marginal on [0,1]^d, eta depending on coordinate ``axis`` only."""

    name = "oracle"
    d: int
    axis: int

    def _check(self) -> None:
        if self.d < 1:
            raise ValueError("dimension must be positive")
        if not 0 <= self.axis < self.d:
            raise ValueError(f"axis {self.axis} outside 0..{self.d - 1}")

    def eta1(self, t: np.ndarray) -> np.ndarray:
        raise NotImplementedError

    def integral1(self, a: float, b: float) -> float:
        """Integral of eta along the axis over [a, b]."""
        raise NotImplementedError

    def bayes_intervals(self) -> list[tuple[float, float]]:
        raise NotImplementedError

    def margin_mass(self, t: float) -> float:
        raise NotImplementedError

    @property
    def margin_alpha(self) -> float:
        return math.inf

    @property
    def smoothness_beta(self) -> float:
        return 1.0

    def eta(self, X) -> np.ndarray:
        X = np.atleast_2d(np.asarray(X, dtype=float))
        return self.eta1(X[:, self.axis])

    def bayes_member(self, p) -> bool:
        return bool(self.eta(np.asarray(p, dtype=float).reshape(1, -1))[0] >= 0)

    def bayes_set(self) -> BoxUnion:
        parts = []
        for a, b in self.bayes_intervals():
            lo, hi = [0.0] * self.d, [1.0] * self.d
            lo[self.axis], hi[self.axis] = a, b
            parts.append(Box(tuple(lo), tuple(hi)))
        return BoxUnion(self.d, tuple(parts))

    def sample(self, n: int, seed) -> Dataset:
        """All points first, then labels, from one generator seeded by ``seed``."""
        if n < 1:
            raise ValueError("n must be positive")
        rng = np.random.default_rng(seed)
        X = rng.random((n, self.d))
        p = (1.0 + self.eta(X)) / 2.0
        y = np.where(rng.random(n) < p, 1, -1)
        return Dataset(X, y)

    def _box_integral(self, lo: np.ndarray, hi: np.ndarray) -> float:
        vol = 1.0
        for i in range(self.d):
            if i != self.axis:
                vol *= max(0.0, hi[i] - lo[i])
        if vol == 0.0 or hi[self.axis] <= lo[self.axis]:
            return 0.0
        return vol * self.integral1(lo[self.axis], hi[self.axis])

    def excess_risk_exact(self, S) -> RiskReport:
        if S is None:
            S = BoxUnion(self.d)
        if not hasattr(S, "boxes"):
            raise UnsupportedRegion(f"{type(S).__name__} has no exact box decomposition")
        boxes = S.boxes()
        bayes = math.fsum(self.integral1(a, b) for a, b in self.bayes_intervals())
        inside = math.fsum(self._box_integral(lo, hi) for lo, hi in boxes)
        return RiskReport(max(0.0, bayes - inside), "exact")

    def excess_risk_mc(self, S, N: int, seed) -> RiskReport:
        if N < 1:
            raise ValueError("N must be positive")
        region = as_region(S, self.d)
        U = np.random.default_rng(seed).random((N, self.d))
        eta = self.eta(U)
        diff = region.contains_many(U) != (eta >= 0)
        w = np.where(diff, np.abs(eta), 0.0)
        se = float(w.std(ddof=1) / math.sqrt(N)) if N > 1 else float("nan")
        return RiskReport(float(w.mean()), "monte-carlo", se)


@dataclass(frozen=True)
class SignedPower(DistributionOracle):
    """eta(x) = sign(x_a - 1/2) |x_a - 1/2|^delta."""

    delta: float = 1.0
    d: int = 1
    axis: int = 0
    name = "signed-power"

    def __post_init__(self):
        self._check()
        if not 0 < self.delta <= 1:
            raise ValueError("delta must lie in (0, 1]")

    def eta1(self, t):
        s = np.asarray(t, dtype=float) - 0.5
        return np.sign(s) * np.abs(s) ** self.delta

    def _primitive(self, t: float) -> float:
        return abs(t - 0.5) ** (self.delta + 1) / (self.delta + 1)

    def integral1(self, a, b):
        return self._primitive(b) - self._primitive(a)

    def bayes_intervals(self):
        return [(0.5, 1.0)]

    def margin_mass(self, t):
        if not 0 < t <= 1:
            raise ValueError("t must lie in (0, 1]")
        return min(1.0, 2.0 * t ** (1.0 / self.delta))

    @property
    def margin_alpha(self):
        return 1.0 / self.delta


@dataclass(frozen=True)
class Massart(DistributionOracle):
    """eta(x) = A sign(x_a - 1/2)."""

    amp: float = 1.0
    d: int = 1
    axis: int = 0
    name = "massart"

    def __post_init__(self):
        self._check()
        if not 0 < self.amp <= 1:
            raise ValueError("amplitude must lie in (0, 1]")

    def eta1(self, t):
        return self.amp * np.sign(np.asarray(t, dtype=float) - 0.5)

    def integral1(self, a, b):
        pos = max(0.0, b - max(a, 0.5))
        neg = max(0.0, min(b, 0.5) - a)
        return self.amp * (pos - neg)

    def bayes_intervals(self):
        return [(0.5, 1.0)]

    def margin_mass(self, t):
        if not 0 < t <= 1:
            raise ValueError("t must lie in (0, 1]")
        return 0.0 if t < self.amp else 1.0


@dataclass(frozen=True)
class DyadicStripe(DistributionOracle):
    """eta = A * pattern[k] on the k-th level-``level`` slab along the axis."""

    amp: float = 1.0
    level: int = 1
    pattern: tuple[int, ...] = (-1, 1)
    d: int = 1
    axis: int = 0
    name = "stripe"

    def __post_init__(self):
        self._check()
        if not 0 < self.amp <= 1:
            raise ValueError("amplitude must lie in (0, 1]")
        if len(self.pattern) != 1 << self.level or any(s not in (-1, 1) for s in self.pattern):
            raise ValueError(f"pattern must hold 2^{self.level} entries of +-1")

    def _slab(self, t):
        k = np.floor(np.asarray(t, dtype=float) * (1 << self.level)).astype(np.int64)
        return np.clip(k, 0, (1 << self.level) - 1)

    def eta1(self, t):
        return self.amp * np.asarray(self.pattern, dtype=float)[self._slab(t)]

    def integral1(self, a, b):
        w = 1.0 / (1 << self.level)
        return self.amp * math.fsum(
            s * max(0.0, min(b, (k + 1) * w) - max(a, k * w)) for k, s in enumerate(self.pattern)
        )

    def bayes_intervals(self):
        w = 1.0 / (1 << self.level)
        return [(k * w, (k + 1) * w) for k, s in enumerate(self.pattern) if s > 0]

    def margin_mass(self, t):
        if not 0 < t <= 1:
            raise ValueError("t must lie in (0, 1]")
        return 0.0 if t < self.amp else 1.0


def make_oracle(
    kind: str,
    d: int = 1,
    delta: float = 1.0,
    amp: float = 1.0,
    axis: int = 0,
    level: int = 1,
    pattern: Sequence[int] | None = None,
) -> DistributionOracle:
    if kind == "signed-power":
        return SignedPower(delta, d, axis)
    if kind == "massart":
        return Massart(amp, d, axis)
    if kind == "stripe":
        if pattern is None:
            half = 1 << max(0, level - 1)
            pattern = (-1,) * half + (1,) * half if level > 0 else (1,)
        return DyadicStripe(amp, level, tuple(pattern), d, axis)
    raise ValueError(f"unknown distribution {kind!r}")


def rate_exponent(alpha: float, beta: float, d: int) -> float:
    """Target slope ``-((1+a)b) / ((2+a)b + d)`` of log excess risk against log n."""
    if math.isinf(alpha):
        return -1.0
    return -((1 + alpha) * beta) / ((2 + alpha) * beta + d)
