"""JSON form of fitted classifiers.

Layout::

    {"dimension": d, "algorithm": "plain" | "decorated" | "uniform",
     "nodes": [{"level", "index", "is_leaf", "leaf_positive",
                "decoration": {"normal", "offset", "positive_side"}?}, ...],
     "grid": {"l", "positive"}?,  # uniform baseline only
     "meta": {"m_star", "seed", "j_max", ...}}

Nodes are listed breadth-first by address. Floats are written with
``repr`` so that loading reproduces them bit for bit.
"""

from __future__ import annotations

import json
from pathlib import Path

from .empirical import GridClassifier, SetClassifier
from .forest import CompleteTree
from .geometry import DyadicCube, HCell, Hyperplane


class ModelFormatError(ValueError):
    pass


def model_to_dict(clf, meta: dict | None = None) -> dict:
    meta = dict(meta or {})
    if isinstance(clf, GridClassifier):
        return {
            "dimension": clf.dim,
            "algorithm": "uniform",
            "nodes": [],
            "grid": {"l": clf.l, "positive": [list(c) for c in sorted(clf.positive)]},
            "meta": meta,
        }
    tree = clf.tree
    nodes = []
    for q in tree.ordered():
        leaf = tree.is_leaf(q)
        node = {
            "level": q.level,
            "index": list(q.index),
            "is_leaf": leaf,
            "leaf_positive": leaf and (q in clf.positive or q in clf.decorations),
        }
        cell = clf.decorations.get(q)
        if cell is not None:
            node["decoration"] = {
                "normal": [float(v) for v in cell.cut.normal],
                "offset": float(cell.cut.offset),
                "positive_side": cell.side,
            }
        nodes.append(node)
    return {"dimension": clf.dim, "algorithm": clf.algorithm, "nodes": nodes, "meta": meta}


def model_from_dict(doc: dict):
    try:
        d = int(doc["dimension"])
        algo = doc["algorithm"]
        meta = doc.get("meta", {})
        if algo == "uniform":
            g = doc["grid"]
            return GridClassifier(d, int(g["l"]), frozenset(tuple(int(k) for k in c) for c in g["positive"])), meta
        cubes, positive, decorations = [], [], {}
        for node in doc["nodes"]:
            q = DyadicCube(int(node["level"]), tuple(int(k) for k in node["index"]))
            cubes.append(q)
            dec = node.get("decoration")
            if dec is not None:
                h = Hyperplane(tuple(float(v) for v in dec["normal"]), float(dec["offset"]))
                decorations[q] = HCell(q, h, int(dec["positive_side"]))
            elif node.get("leaf_positive"):
                positive.append(q)
        tree = CompleteTree(cubes, d)
        m = meta.get("m_star")
        return SetClassifier(tree, positive, decorations, algorithm=algo, m=m), meta
    except (KeyError, TypeError, ValueError) as exc:
        raise ModelFormatError(f"invalid model document: {exc}") from exc


def save_model(clf, path: str | Path, meta: dict | None = None) -> None:
    text = json.dumps(model_to_dict(clf, meta), indent=1, sort_keys=True)
    Path(path).write_text(text + "\n", encoding="utf-8")


def load_model(path: str | Path):
    try:
        doc = json.loads(Path(path).read_text(encoding="utf-8"))
    except json.JSONDecodeError as exc:
        raise ModelFormatError(f"{path}: not JSON ({exc})") from exc
    return model_from_dict(doc)
