import json

import numpy as np
import pytest

from dyadtree import Dataset, write_csv
from dyadtree.cli import main
from dyadtree.harness import (
    ExperimentConfig,
    coerce_config,
    derive_seeds,
    fit_slope,
    parse_ngrid,
    read_config,
    run_rates,
    run_row,
)
from dyadtree.model_io import load_model, model_from_dict, model_to_dict
from dyadtree.oracle import SignedPower
from dyadtree.select import split_halves


@pytest.fixture
def z1_csv(tmp_path, z1):
    p = tmp_path / "z1.csv"
    write_csv(z1, p)
    return p


def grid_points(d, k=1000):
    rng = np.random.default_rng(0)
    return np.vstack([rng.random((k - 3, d)), np.zeros((1, d)), np.ones((1, d)), np.full((1, d), 0.5)])


def test_fit_round_trip(tmp_path, z1_csv):
    out = tmp_path / "m.json"
    assert main(["fit", str(z1_csv), "--algo", "plain", "--seed", "7", "--out", str(out)]) == 0
    clf, meta = load_model(out)
    again, _ = model_from_dict(json.loads(out.read_text()))
    X = grid_points(1)
    assert np.array_equal(clf.contains_many(X), again.contains_many(X))
    assert meta["seed"] == 7 and meta["j_max"] == 16


@pytest.mark.parametrize("algo", ["plain", "decorated", "uniform"])
def test_round_trip_all_algorithms(tmp_path, algo):
    o = SignedPower(0.5, d=2)
    data = o.sample(300, 1)
    p = tmp_path / "d.csv"
    write_csv(data, p)
    out = tmp_path / "m.json"
    assert main(["fit", str(p), "--algo", algo, "--seed", "3", "--out", str(out)]) == 0
    clf, _ = load_model(out)
    doc = json.loads(out.read_text())
    rebuilt, _ = model_from_dict(doc)
    assert model_to_dict(rebuilt, doc["meta"]) == doc
    X = grid_points(2)
    assert np.array_equal(clf.contains_many(X), rebuilt.contains_many(X))


def test_model_json_layout(tmp_path, z1_csv):
    out = tmp_path / "m.json"
    main(["fit", str(z1_csv), "--seed", "7", "--m-grid", "0,1", "--out", str(out)])
    doc = json.loads(out.read_text())
    assert set(doc) == {"dimension", "algorithm", "nodes", "meta"}
    keys = [(n["level"], n["index"]) for n in doc["nodes"]]
    assert keys == sorted(keys)
    assert doc["nodes"][0]["level"] == 0


def test_decorated_dimension_limit(tmp_path):
    rng = np.random.default_rng(0)
    p = tmp_path / "d4.csv"
    write_csv(Dataset(rng.random((10, 4)), rng.choice([-1, 1], 10)), p)
    assert main(["fit", str(p), "--algo", "decorated", "--d", "4"]) == 1


def test_empty_csv(tmp_path, capsys):
    p = tmp_path / "e.csv"
    p.write_text("")
    assert main(["fit", str(p)]) == 2
    p.write_text("x1,y\n")
    assert main(["fit", str(p)]) == 2
    assert main(["fit", str(tmp_path / "missing.csv")]) == 2


def test_bad_flags():
    assert main(["fit"]) == 1
    assert main(["rates", "--trials", "zero"]) == 1
    assert main(["bogus"]) == 1


def test_predict(tmp_path, z1_csv, z1):
    model = tmp_path / "m.json"
    # z1 split into halves of 2; fit on all 4 points by forcing the grid
    main(["fit", str(z1_csv), "--seed", "7", "--out", str(model)])
    pts = tmp_path / "p.csv"
    pts.write_text("x1\n0.7\n0.2\n")
    out = tmp_path / "labels.csv"
    assert main(["predict", str(model), str(pts), "--out", str(out)]) == 0
    clf, _ = load_model(model)
    want = ["y"] + [str(v) for v in np.where(clf.contains_many(np.array([[0.7], [0.2]])), 1, -1)]
    assert out.read_text().split() == want


def test_predict_model_from_z1_with_m1(tmp_path):
    from dyadtree.empirical import SetClassifier
    from dyadtree.forest import CompleteTree
    from dyadtree.geometry import DyadicCube
    from dyadtree.model_io import save_model

    tree = CompleteTree.from_refined([DyadicCube(0, (0,))], 1)
    model = tmp_path / "m.json"
    save_model(SetClassifier(tree, [DyadicCube(1, (1,))], m=1), model, {"m_star": 1})
    pts = tmp_path / "p.csv"
    pts.write_text("x1\n0.7\n0.2\n")
    out = tmp_path / "labels.csv"
    main(["predict", str(model), str(pts), "--out", str(out)])
    assert out.read_text().split() == ["y", "1", "-1"]


def test_predict_dimension_mismatch(tmp_path, z1_csv):
    model = tmp_path / "m.json"
    main(["fit", str(z1_csv), "--out", str(model)])
    pts = tmp_path / "p.csv"
    pts.write_text("x1,x2\n0.7,0.1\n")
    assert main(["predict", str(model), str(pts)]) == 2


def test_replay_reproduces_reported_risk(tmp_path):
    data = SignedPower(1.0).sample(400, 11)
    p = tmp_path / "d.csv"
    write_csv(data, p)
    model = tmp_path / "m.json"
    main(["fit", str(p), "--seed", "5", "--out", str(model)])
    _, meta = load_model(model)
    h = split_halves(data, 5)
    pts = tmp_path / "pts.csv"
    write_csv(h.first, pts)
    out = tmp_path / "labels.csv"
    main(["predict", str(model), str(pts), "--out", str(out)])
    labels = np.array([int(v) for v in out.read_text().split()[1:]])
    assert np.mean(labels != h.first.y) == meta["risk_first_half"]


def test_eval(tmp_path, capsys):
    data = SignedPower(1.0).sample(300, 2)
    p = tmp_path / "d.csv"
    write_csv(data, p)
    model = tmp_path / "m.json"
    main(["fit", str(p), "--out", str(model)])
    capsys.readouterr()
    assert main(["eval", str(model), "--dist", "signed-power", "--delta", "1", "--data", str(p)]) == 0
    out = capsys.readouterr().out
    assert "excess risk (exact)" in out and "empirical risk" in out
    assert main(["eval", str(model), "--mc", "1000"]) == 0
    assert "monte-carlo" in capsys.readouterr().out


def test_parse_ngrid():
    assert parse_ngrid("3..5") == [8, 16, 32]
    assert parse_ngrid("100,200") == [100, 200]


def test_config_file_and_override(tmp_path):
    cfg = tmp_path / "exp.cfg"
    cfg.write_text("# small run\ndist = massart\namp=0.5\nngrid=4..5\ntrials=2\nseed=3\n")
    values = read_config(cfg)
    values["trials"] = 3
    c = coerce_config(values)
    assert (c.dist, c.amp, c.ngrid, c.trials, c.seed) == ("massart", 0.5, [16, 32], 3, 3)
    cfg.write_text("bogus=1\n")
    with pytest.raises(ValueError):
        read_config(cfg)


def test_config_validation():
    with pytest.raises(ValueError):
        ExperimentConfig(ngrid=[64, 32])
    with pytest.raises(ValueError):
        ExperimentConfig(trials=0)


def test_rows_reproducible_in_isolation():
    cfg = ExperimentConfig(ngrid=[64, 128], trials=3, seed=4)
    rows = run_rates(cfg)
    again = run_row(cfg, 128, 1)
    match = next(r for r in rows if r.n == 128 and r.trial == 1)
    assert (again.seed, again.m_star, again.excess_risk) == (match.seed, match.m_star, match.excess_risk)
    assert match.seed == derive_seeds(4, 128, 1)[0]
    assert all(r.excess_risk >= 0 for r in rows)


def test_rates_cli(tmp_path, capsys):
    out = tmp_path / "r.csv"
    assert main(["rates", "--dist", "signed-power", "--delta", "1", "--ngrid", "5..7", "--trials", "3",
                 "--out", str(out)]) == 0
    text = capsys.readouterr().out
    assert "target exponent: -0.5000" in text
    lines = out.read_text().splitlines()
    assert lines[0] == "n,trial,seed,m_star,excess_risk,method"
    assert len(lines) == 1 + 9
    assert (tmp_path / "r.timing.csv").exists()


def test_massart_stripe_decay(tmp_path, capsys):
    out = tmp_path / "r.csv"
    assert main(["rates", "--dist", "stripe", "--amp", "0.8", "--ngrid", "5..9", "--trials", "7",
                 "--out", str(out)]) == 0
    rows = [line.split(",") for line in out.read_text().splitlines()[1:]]
    med = lambda n: float(np.median([float(r[4]) for r in rows if int(r[0]) == n]))
    assert med(512) <= med(32)


def test_fit_slope():
    ns = [2**k for k in range(5, 10)]
    assert fit_slope(ns, [n**-0.5 for n in ns]) == pytest.approx(-0.5)
    assert np.isnan(fit_slope([8, 16], [0.0, 0.0]))
