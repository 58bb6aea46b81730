"""Labeled samples, datasets and their CSV form (header ``x1,...,xd,y``)."""

from __future__ import annotations

import csv
from dataclasses import dataclass
from pathlib import Path
from typing import Iterable, NamedTuple, Sequence

import numpy as np


class DataError(ValueError):
    """Malformed or unusable input data."""


class LabeledSample(NamedTuple):
    x: tuple[float, ...]
    y: int


@dataclass(frozen=True, eq=False)
class Dataset:
    X: np.ndarray
    y: np.ndarray

    def __post_init__(self):
        X = np.atleast_2d(np.asarray(self.X, dtype=float))
        y = np.asarray(self.y).reshape(-1)
        if X.shape[0] == 0 or X.shape[1] == 0:
            raise DataError("dataset is empty")
        if X.shape[0] != y.shape[0]:
            raise DataError(f"{X.shape[0]} points but {y.shape[0]} labels")
        if not np.all(np.isin(y, (-1, 1))):
            raise DataError("labels must be -1 or +1")
        if not np.all(np.isfinite(X)) or np.any((X < 0) | (X > 1)):
            raise DataError("points must lie in [0,1]^d")
        X.setflags(write=False)
        y = y.astype(np.int64)
        y.setflags(write=False)
        object.__setattr__(self, "X", X)
        object.__setattr__(self, "y", y)

    @classmethod
    def from_samples(cls, samples: Iterable[LabeledSample | tuple]) -> "Dataset":
        samples = list(samples)
        if not samples:
            raise DataError("dataset is empty")
        dims = {len(s[0]) for s in samples}
        if len(dims) != 1:
            raise DataError("samples have mixed dimensions")
        return cls(np.array([s[0] for s in samples], dtype=float), np.array([s[1] for s in samples]))

    @property
    def n(self) -> int:
        return self.X.shape[0]

    @property
    def d(self) -> int:
        return self.X.shape[1]

    @property
    def positives(self) -> int:
        return int(np.count_nonzero(self.y == 1))

    def samples(self) -> list[LabeledSample]:
        return [LabeledSample(tuple(float(v) for v in x), int(t)) for x, t in zip(self.X, self.y)]

    def take(self, idx: Sequence[int] | np.ndarray) -> "Dataset":
        idx = np.asarray(idx, dtype=np.int64)
        return Dataset(self.X[idx], self.y[idx])

    def __len__(self) -> int:
        return self.n


def fmt_float(v: float) -> str:
    return format(float(v), ".17g")


def write_csv(data: Dataset, path: str | Path) -> None:
    with open(path, "w", newline="", encoding="utf-8") as fh:
        w = csv.writer(fh, lineterminator="\n")
        w.writerow([f"x{i + 1}" for i in range(data.d)] + ["y"])
        for x, t in zip(data.X, data.y):
            w.writerow([fmt_float(v) for v in x] + [int(t)])


def read_points_csv(path: str | Path) -> tuple[np.ndarray, np.ndarray | None]:
    """Read ``x1..xd`` columns and, when present, a ``y`` column."""
    try:
        with open(path, newline="", encoding="utf-8") as fh:
            rows = [r for r in csv.reader(fh) if r]
    except UnicodeDecodeError as exc:
        raise DataError(f"{path}: not UTF-8 text") from exc
    if not rows:
        raise DataError(f"{path}: empty file")
    header = [h.strip() for h in rows[0]]
    xcols = [i for i, h in enumerate(header) if h.startswith("x")]
    expected = [f"x{i + 1}" for i in range(len(xcols))]
    if not xcols or [header[i] for i in xcols] != expected:
        raise DataError(f"{path}: header must be x1,...,xd[,y], got {header}")
    ycol = header.index("y") if "y" in header else None
    body = rows[1:]
    if not body:
        raise DataError(f"{path}: no data rows")
    try:
        X = np.array([[float(r[i]) for i in xcols] for r in body], dtype=float)
        y = None if ycol is None else np.array([int(float(r[ycol])) for r in body])
    except (ValueError, IndexError) as exc:
        raise DataError(f"{path}: malformed row ({exc})") from exc
    if not np.all(np.isfinite(X)) or np.any((X < 0) | (X > 1)):
        raise DataError(f"{path}: points must lie in [0,1]^d")
    return X, y


def read_csv(path: str | Path) -> Dataset:
    X, y = read_points_csv(path)
    if y is None:
        raise DataError(f"{path}: missing y column")
    return Dataset(X, y)
