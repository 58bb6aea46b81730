"""Convergence-rate experiments: sample, fit with model selection, score, summarize.

Every row draws its randomness from ``SeedSequence([seed, n, trial])``: the
first generated word seeds the sample, the second the half split and the
third any Monte Carlo risk evaluation. A row can therefore be recomputed on
its own, and rows are written in (n, trial) order whatever the worker count.
"""

from __future__ import annotations

import csv
import io
import math
import time
from concurrent.futures import ProcessPoolExecutor
from dataclasses import asdict, dataclass, field, fields
from pathlib import Path
from typing import Sequence

import numpy as np

from .data import fmt_float
from .empirical import UnsupportedRegion
from .geometry import DEFAULT_JMAX
from .oracle import DistributionOracle, make_oracle, rate_exponent
from .select import select_model, select_uniform

MC_POINTS = 100_000


@dataclass
class ExperimentConfig:
    dist: str = "signed-power"
    d: int = 1
    delta: float = 1.0
    amp: float = 1.0
    axis: int = 0
    level: int = 1
    algo: str = "plain"
    ngrid: list[int] = field(default_factory=lambda: [2**k for k in range(7, 14)])
    trials: int = 20
    seed: int = 0
    jmax: int = DEFAULT_JMAX
    m_policy: str = "saturation"
    workers: int = 1
    alpha: float | None = None
    beta: float | None = None
    out: str = "rates.csv"

    def __post_init__(self):
        self.ngrid = [int(n) for n in self.ngrid]
        if any(b <= a for a, b in zip(self.ngrid, self.ngrid[1:])):
            raise ValueError("n grid must be strictly increasing")
        if not self.ngrid or self.ngrid[0] < 4:
            raise ValueError("n grid values must be at least 4")
        if self.trials < 1:
            raise ValueError("trials must be at least 1")
        if self.algo not in ("plain", "decorated", "uniform"):
            raise ValueError(f"unknown algorithm {self.algo!r}")
        if self.m_policy not in ("saturation", "full"):
            raise ValueError(f"unknown m policy {self.m_policy!r}")

    def oracle(self) -> DistributionOracle:
        return make_oracle(self.dist, self.d, self.delta, self.amp, self.axis, self.level)

    def target_exponent(self) -> float:
        o = self.oracle()
        alpha = o.margin_alpha if self.alpha is None else self.alpha
        beta = o.smoothness_beta if self.beta is None else self.beta
        return rate_exponent(alpha, beta, self.d)


@dataclass
class RateRow:
    n: int
    trial: int
    seed: int
    m_star: int
    excess_risk: float
    method: str
    wall_time: float

    CSV_FIELDS = ("n", "trial", "seed", "m_star", "excess_risk", "method")


def derive_seeds(base: int, n: int, trial: int) -> tuple[int, int, int]:
    words = np.random.SeedSequence([base, n, trial]).generate_state(3)
    return int(words[0]), int(words[1]), int(words[2])


def run_row(cfg: ExperimentConfig, n: int, trial: int) -> RateRow:
    t0 = time.perf_counter()
    data_seed, split_seed, mc_seed = derive_seeds(cfg.seed, n, trial)
    oracle = cfg.oracle()
    data = oracle.sample(n, data_seed)
    if cfg.algo == "uniform":
        report = select_uniform(data, seed=split_seed)
    else:
        m_grid = list(range(0, n // 2 + 1)) if cfg.m_policy == "full" else None
        report = select_model(data, cfg.algo, m_grid, split_seed, cfg.jmax)
    try:
        risk = oracle.excess_risk_exact(report.classifier)
    except UnsupportedRegion:
        risk = oracle.excess_risk_mc(report.classifier, MC_POINTS, mc_seed)
    return RateRow(n, trial, data_seed, report.m_star, risk.value, risk.method, time.perf_counter() - t0)


def _row_task(args):
    return run_row(*args)


def run_rates(cfg: ExperimentConfig) -> list[RateRow]:
    tasks = [(cfg, n, t) for n in cfg.ngrid for t in range(cfg.trials)]
    if cfg.workers > 1:
        with ProcessPoolExecutor(max_workers=cfg.workers) as pool:
            return list(pool.map(_row_task, tasks))
    return [run_row(*t) for t in tasks]


def rows_to_csv(rows: Sequence[RateRow]) -> str:
    buf = io.StringIO()
    w = csv.writer(buf, lineterminator="\n")
    w.writerow(RateRow.CSV_FIELDS)
    for r in rows:
        w.writerow([r.n, r.trial, r.seed, r.m_star, fmt_float(r.excess_risk), r.method])
    return buf.getvalue()


def timings_to_csv(rows: Sequence[RateRow]) -> str:
    buf = io.StringIO()
    w = csv.writer(buf, lineterminator="\n")
    w.writerow(("n", "trial", "wall_time"))
    for r in rows:
        w.writerow([r.n, r.trial, f"{r.wall_time:.6f}"])
    return buf.getvalue()


@dataclass
class RateSummary:
    ns: list[int]
    medians: list[float]
    slope: float
    target: float
    decreasing: bool

    def text(self) -> str:
        lines = ["n,median_excess_risk"]
        lines += [f"{n},{fmt_float(m)}" for n, m in zip(self.ns, self.medians)]
        lines.append(f"fitted slope: {self.slope:.4f}   target exponent: {self.target:.4f}")
        lines.append(f"median decreases from smallest to largest n: {self.decreasing}")
        return "\n".join(lines)


def fit_slope(ns: Sequence[int], medians: Sequence[float]) -> float:
    """Least-squares slope of log(median) on log(n), over positive medians."""
    pts = [(math.log(n), math.log(m)) for n, m in zip(ns, medians) if m > 0]
    if len(pts) < 2:
        return float("nan")
    x, y = np.array(pts).T
    return float(np.polyfit(x, y, 1)[0])


def summarize(rows: Sequence[RateRow], cfg: ExperimentConfig) -> RateSummary:
    ns = sorted({r.n for r in rows})
    medians = [float(np.median([r.excess_risk for r in rows if r.n == n])) for n in ns]
    return RateSummary(ns, medians, fit_slope(ns, medians), cfg.target_exponent(), medians[-1] < medians[0])


def write_rates(rows: Sequence[RateRow], out: str | Path) -> Path:
    out = Path(out)
    out.write_text(rows_to_csv(rows), encoding="utf-8")
    timing = out.with_name(out.stem + ".timing.csv")
    timing.write_text(timings_to_csv(rows), encoding="utf-8")
    return timing


def parse_ngrid(text: str) -> list[int]:
    """``"a..b"`` means 2^a..2^b; otherwise a comma list of sizes."""
    text = text.strip()
    if ".." in text:
        a, b = (int(s) for s in text.split("..", 1))
        if a > b:
            raise ValueError(f"empty n grid {text!r}")
        return [2**k for k in range(a, b + 1)]
    return [int(s) for s in text.split(",") if s.strip()]


_CONFIG_TYPES = {f.name: f.type for f in fields(ExperimentConfig)}


def read_config(path: str | Path) -> dict[str, str]:
    """Flat ``key=value`` lines; ``#`` starts a comment."""
    out = {}
    for lineno, raw in enumerate(Path(path).read_text(encoding="utf-8").splitlines(), 1):
        line = raw.split("#", 1)[0].strip()
        if not line:
            continue
        if "=" not in line:
            raise ValueError(f"{path}:{lineno}: expected key=value")
        key, value = (s.strip() for s in line.split("=", 1))
        key = key.replace("-", "_")
        if key not in _CONFIG_TYPES:
            raise ValueError(f"{path}:{lineno}: unknown key {key!r}")
        out[key] = value
    return out


def coerce_config(values: dict) -> ExperimentConfig:
    kw = {}
    for key, value in values.items():
        if value is None:
            continue
        if key == "ngrid":
            kw[key] = parse_ngrid(value) if isinstance(value, str) else list(value)
        elif key in ("d", "axis", "level", "trials", "seed", "jmax", "workers"):
            kw[key] = int(value)
        elif key in ("delta", "amp", "alpha", "beta"):
            kw[key] = float(value)
        else:
            kw[key] = value
    return ExperimentConfig(**kw)


def config_dict(cfg: ExperimentConfig) -> dict:
    return asdict(cfg)
