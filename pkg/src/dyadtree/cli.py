"""Command line: ``dyadtree {fit,predict,eval,rates}``.

Exit codes: 0 ok, 1 usage, 2 data error, 3 internal error.
"""

from __future__ import annotations

import argparse
import csv
import io
import sys

import numpy as np

from .data import DataError, read_csv, read_points_csv
from .decorate import MAX_DECORATED_DIM
from .empirical import UnsupportedRegion, misclassified
from .geometry import DEFAULT_JMAX
from .harness import coerce_config, read_config, run_rates, summarize, write_rates
from .model_io import ModelFormatError, load_model, save_model
from .oracle import make_oracle
from .select import select_model, select_uniform, split_halves

EXIT_OK, EXIT_USAGE, EXIT_DATA, EXIT_INTERNAL = 0, 1, 2, 3


class UsageError(Exception):
    pass


class _Parser(argparse.ArgumentParser):
    def error(self, message):
        raise UsageError(f"{self.prog}: {message}")


def _shared(p: argparse.ArgumentParser) -> None:
    p.add_argument("--algo", choices=("plain", "decorated", "uniform"), default=None)
    p.add_argument("--d", type=int, default=None, help="expected dimension")
    p.add_argument("--jmax", type=int, default=None)
    p.add_argument("--seed", type=int, default=None)
    p.add_argument("--out", default=None)


def _oracle_flags(p: argparse.ArgumentParser) -> None:
    p.add_argument("--dist", choices=("signed-power", "massart", "stripe"), default=None)
    p.add_argument("--delta", type=float, default=None)
    p.add_argument("--amp", type=float, default=None)
    p.add_argument("--axis", type=int, default=None)
    p.add_argument("--level", type=int, default=None, help="stripe level")


def build_parser() -> argparse.ArgumentParser:
    parser = _Parser(prog="dyadtree", description="Dyadic tree set estimators for binary classification.")
    sub = parser.add_subparsers(dest="command", required=True, parser_class=_Parser)

    p = sub.add_parser("fit", help="fit with hold-out model selection")
    p.add_argument("train")
    _shared(p)
    p.add_argument("--m-grid", default=None, help="comma list of budgets (default 0..saturation)")
    p.add_argument("--l-grid", default=None, help="comma list of grid sizes for --algo uniform")
    p.add_argument("--min-split", type=int, default=2)

    p = sub.add_parser("predict", help="label points with a fitted model")
    p.add_argument("model")
    p.add_argument("points")
    p.add_argument("--out", default=None)

    p = sub.add_parser("eval", help="excess risk of a model under a synthetic distribution")
    p.add_argument("model")
    _oracle_flags(p)
    p.add_argument("--mc", type=int, default=None, help="force Monte Carlo with this many points")
    p.add_argument("--seed", type=int, default=0)
    p.add_argument("--data", default=None, help="labeled CSV for empirical risk")

    p = sub.add_parser("rates", help="convergence-rate experiment")
    _shared(p)
    _oracle_flags(p)
    p.add_argument("--ngrid", default=None, help="a..b for sizes 2^a..2^b, or a comma list")
    p.add_argument("--trials", type=int, default=None)
    p.add_argument("--workers", type=int, default=None)
    p.add_argument("--m-policy", dest="m_policy", choices=("saturation", "full"), default=None)
    p.add_argument("--alpha", type=float, default=None)
    p.add_argument("--beta", type=float, default=None)
    p.add_argument("--config", default=None)
    return parser


def _ints(text: str | None) -> list[int] | None:
    if text is None:
        return None
    try:
        return [int(s) for s in text.split(",") if s.strip()]
    except ValueError as exc:
        raise UsageError(f"expected a comma list of integers, got {text!r}") from exc


def cmd_fit(a) -> int:
    algo = a.algo or "plain"
    seed = 0 if a.seed is None else a.seed
    jmax = DEFAULT_JMAX if a.jmax is None else a.jmax
    if algo == "decorated" and a.d is not None and a.d > MAX_DECORATED_DIM:
        raise UsageError(f"decoration supports d <= {MAX_DECORATED_DIM}")
    data = read_csv(a.train)
    if a.d is not None and a.d != data.d:
        raise DataError(f"--d {a.d} but {a.train} has dimension {data.d}")
    if algo == "decorated" and data.d > MAX_DECORATED_DIM:
        raise UsageError(f"decoration supports d <= {MAX_DECORATED_DIM}")
    if algo == "uniform":
        report = select_uniform(data, _ints(a.l_grid), seed)
    else:
        report = select_model(data, algo, _ints(a.m_grid), seed, jmax, a.min_split)
    halves = split_halves(data, seed)
    risk1 = misclassified(report.classifier, halves.first) / halves.first.n
    risk2 = misclassified(report.classifier, halves.second) / halves.second.n
    meta = {
        "m_star": report.m_star,
        "seed": seed,
        "j_max": jmax,
        "min_split": a.min_split,
        "n": data.n,
        "set_aside": report.set_aside,
        "risk_first_half": risk1,
        "risk_second_half": risk2,
    }
    out = a.out or "model.json"
    save_model(report.classifier, out, meta)
    print(report.summary())
    print(f"empirical risk: first half {risk1:.6g}, second half {risk2:.6g}")
    print(f"model written to {out}")
    return EXIT_OK


def cmd_predict(a) -> int:
    clf, _ = load_model(a.model)
    X, _ = read_points_csv(a.points)
    if X.shape[1] != clf.dim:
        raise DataError(f"model has dimension {clf.dim}, points have {X.shape[1]}")
    labels = np.where(clf.contains_many(X), 1, -1)
    buf = io.StringIO()
    w = csv.writer(buf, lineterminator="\n")
    w.writerow(["y"])
    w.writerows([[int(v)] for v in labels])
    if a.out:
        with open(a.out, "w", encoding="utf-8", newline="") as fh:
            fh.write(buf.getvalue())
    else:
        sys.stdout.write(buf.getvalue())
    return EXIT_OK


def cmd_eval(a) -> int:
    clf, _ = load_model(a.model)
    oracle = make_oracle(
        a.dist or "signed-power",
        clf.dim,
        1.0 if a.delta is None else a.delta,
        1.0 if a.amp is None else a.amp,
        a.axis or 0,
        1 if a.level is None else a.level,
    )
    if a.mc is None:
        try:
            r = oracle.excess_risk_exact(clf)
        except UnsupportedRegion:
            r = oracle.excess_risk_mc(clf, 100_000, a.seed)
    else:
        r = oracle.excess_risk_mc(clf, a.mc, a.seed)
    line = f"excess risk ({r.method}): {r.value:.10g}"
    if r.stderr is not None:
        line += f" +- {r.stderr:.3g}"
    print(line)
    if a.data:
        data = read_csv(a.data)
        print(f"empirical risk on {a.data}: {misclassified(clf, data) / data.n:.6g}")
    return EXIT_OK


def cmd_rates(a) -> int:
    values = read_config(a.config) if a.config else {}
    for key in ("dist", "delta", "amp", "axis", "level", "algo", "d", "jmax", "seed",
                "out", "ngrid", "trials", "workers", "m_policy", "alpha", "beta"):
        v = getattr(a, key, None)
        if v is not None:
            values[key] = v
    try:
        cfg = coerce_config(values)
    except (TypeError, ValueError) as exc:
        raise UsageError(str(exc)) from exc
    if cfg.algo == "decorated" and cfg.d > MAX_DECORATED_DIM:
        raise UsageError(f"decoration supports d <= {MAX_DECORATED_DIM}")
    rows = run_rates(cfg)
    timing = write_rates(rows, cfg.out)
    print(summarize(rows, cfg).text())
    print(f"rows written to {cfg.out}, timings to {timing}")
    return EXIT_OK


COMMANDS = {"fit": cmd_fit, "predict": cmd_predict, "eval": cmd_eval, "rates": cmd_rates}


def main(argv=None) -> int:
    parser = build_parser()
    try:
        a = parser.parse_args(argv)
        return COMMANDS[a.command](a)
    except UsageError as exc:
        print(f"error: {exc}", file=sys.stderr)
        return EXIT_USAGE
    except (DataError, ModelFormatError, OSError) as exc:
        print(f"data error: {exc}", file=sys.stderr)
        return EXIT_DATA
    except Exception as exc:  # noqa: BLE001
        print(f"internal error: {type(exc).__name__}: {exc}", file=sys.stderr)
        return EXIT_INTERNAL


if __name__ == "__main__":
    sys.exit(main())
