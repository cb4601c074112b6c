"""Canonical documents, report emission and fixture generation."""

from __future__ import annotations

import hashlib
import json
import math
from dataclasses import dataclass, field
from pathlib import Path

import numpy as np

from .errors import StructuralError
from .metrics import WeightedGraph
from .signature import HhsSignature

EXIT_CODES = {"pass": 0, "fail": 1, "structural": 2, "inconclusive": 3}


def _plain(obj):
    if isinstance(obj, np.bool_):
        return bool(obj)
    if isinstance(obj, np.integer):
        return int(obj)
    if isinstance(obj, np.floating):
        return _plain(float(obj))
    if isinstance(obj, float):
        if math.isnan(obj):
            return None
        if math.isinf(obj):
            return "inf" if obj > 0 else "-inf"
        return obj
    if isinstance(obj, np.ndarray):
        return [_plain(x) for x in obj.tolist()]
    if isinstance(obj, dict):
        return {str(k): _plain(v) for k, v in obj.items()}
    if isinstance(obj, (list, tuple, set, frozenset)):
        items = [_plain(x) for x in obj]
        return sorted(items) if isinstance(obj, (set, frozenset)) else items
    return obj


def dumps(doc):
    """Canonical text: sorted keys, two-space indent, trailing newline."""
    return json.dumps(_plain(doc), sort_keys=True, indent=2, ensure_ascii=False, allow_nan=False) + "\n"


def loads(text):
    try:
        return json.loads(text)
    except json.JSONDecodeError as exc:
        raise StructuralError(f"malformed document: {exc}") from exc


def digest(obj):
    data = obj if isinstance(obj, bytes) else dumps(obj).encode()
    return hashlib.sha256(data).hexdigest()


def read_document(path):
    p = Path(path)
    if not p.is_file():
        raise StructuralError(f"no such file: {path}")
    return loads(p.read_text())


def write_document(path, doc):
    Path(path).write_text(dumps(doc))


def load_signature(path_or_doc):
    doc = read_document(path_or_doc) if isinstance(path_or_doc, (str, Path)) else path_or_doc
    if "signature" in doc and "domains" not in doc:
        doc = doc["signature"]
    return HhsSignature.from_dict(doc)


def load_graph(path_or_doc):
    doc = read_document(path_or_doc) if isinstance(path_or_doc, (str, Path)) else path_or_doc
    if "graph" in doc and "edges" not in doc:
        doc = doc["graph"]
    if "ambient" in doc and "edges" not in doc:
        doc = doc["ambient"]
    return WeightedGraph.from_dict(doc)


def load_model(path_or_doc):
    from .model import RealizedModel

    doc = read_document(path_or_doc) if isinstance(path_or_doc, (str, Path)) else path_or_doc
    return RealizedModel.from_dict(doc)


@dataclass
class ReportDocument:
    command: str
    status: str
    result: dict
    inputs_digest: str = ""
    thresholds: dict = field(default_factory=dict)
    seed: int = 0

    @property
    def exit_code(self):
        return EXIT_CODES[self.status]

    def to_dict(self):
        return {"command": self.command, "status": self.status, "inputs_digest": self.inputs_digest,
                "thresholds": self.thresholds, "seed": self.seed, "result": self.result}

    def dumps(self):
        return dumps(self.to_dict())

    @classmethod
    def from_dict(cls, doc):
        try:
            return cls(doc["command"], doc["status"], doc["result"], doc.get("inputs_digest", ""),
                       doc.get("thresholds", {}), doc.get("seed", 0))
        except KeyError as exc:
            raise StructuralError(f"report document lacks {exc}") from exc

    @classmethod
    def loads(cls, text):
        return cls.from_dict(loads(text))


def inputs_digest(paths=(), extra=None):
    """Hash of the input files' bytes (in the given order) plus any extra parameters."""
    h = hashlib.sha256()
    for p in paths:
        h.update(Path(p).read_bytes())
        h.update(b"\0")
    if extra is not None:
        h.update(dumps(extra).encode())
    return h.hexdigest()


# -- fixtures ----------------------------------------------------------------------

FIXTURES = ("product-of-trees", "glued-flats", "grid", "random-graph", "rel-hyp-signature", "custom")


def _ints(params, **defaults):
    out = {}
    for k, v in defaults.items():
        raw = params.get(k, v)
        try:
            out[k] = int(raw)
        except (TypeError, ValueError) as exc:
            raise StructuralError(f"parameter {k} must be an integer, got {raw!r}") from exc
    return out


def generate_fixture(name, params=None, seed=0):
    """Documents for a named fixture, keyed by file name."""
    from . import fixtures as fx

    params = dict(params or {})
    if name == "product-of-trees":
        p = _ints(params, depth=2, valence=3)
        if p["depth"] < 1 or p["valence"] < 1:
            raise StructuralError("product-of-trees needs depth >= 1 and valence >= 1")
        mutation = params.get("mutation")
        m = (fx.product_model_mutation(mutation, **p) if mutation
             else fx.product_of_trees_model(**p))
        return {"model.json": m.to_dict(), "signature.json": m.sig.to_dict()}
    if name == "glued-flats":
        p = _ints(params, n=6, glue=1)
        gf = fx.GluedFlats(p["n"], p["glue"])
        docs = {"graph.json": gf.graph.to_dict(),
                "peripherals.json": {"sets": [gf.flat1, gf.flat2], "C": float(params.get("C", 1.0)),
                                     "labels": ["flat1", "flat2"]},
                "cosets.json": {"cosets": [{"label": "Q1", "vertices": gf.flat1},
                                           {"label": "Q2", "vertices": gf.flat2}]}}
        if str(params.get("model", "true")).lower() not in ("0", "false", "no"):
            E = float(params.get("E", 2.0))
            m = fx.glued_flats_model(p["n"], p["glue"], E)
            docs["model.json"] = m.to_dict()
            docs["signature.json"] = m.sig.to_dict()
            # product regions reach about 2E off a flat while a flat's own
            # projections have diameter n - 1; B must sit between the two
            B = 3 * E + 1
            if B >= p["n"] - 1:
                B = (2 * E + p["n"] - 1) / 2
            docs["pipeline.json"] = {"model": "model.json", "cosets": "cosets.json",
                                     "peripherals": "peripherals.json", "B": B,
                                     "stages": ["verify", "add-cosets", "isolate", "classify", "quotient", "cusp"]}
        return docs
    if name == "grid":
        p = _ints(params, rows=4, cols=params.get("rows", 4))
        if p["rows"] < 1 or p["cols"] < 1:
            raise StructuralError("grid needs positive dimensions")
        return {"graph.json": fx.grid_graph(p["rows"], p["cols"]).to_dict()}
    if name == "random-graph":
        p = _ints(params, n=20)
        g = fx.random_graph(p["n"], int(params.get("seed", seed)),
                            None if params.get("extra") is None else int(params["extra"]))
        return {"graph.json": g.to_dict()}
    if name == "rel-hyp-signature":
        p = _ints(params, k=2)
        if p["k"] < 1:
            raise StructuralError("rel-hyp-signature needs k >= 1")
        action = fx.block_swap_action(p["k"]) if str(params.get("swap", "false")).lower() in ("1", "true", "yes") else None
        sig = fx.rel_hyp_signature(p["k"], str(params.get("peripheral_unbounded", "false")).lower() in ("1", "true", "yes"),
                                   action)
        return {"signature.json": sig.to_dict()}
    if name == "custom":
        out = {}
        if "signature" in params:
            out["signature.json"] = load_signature(params["signature"]).to_dict()
        if "graph" in params:
            out["graph.json"] = load_graph(params["graph"]).to_dict()
        if "model" in params:
            out["model.json"] = load_model(params["model"]).to_dict()
        if not out:
            raise StructuralError("custom fixture needs a signature, graph or model document")
        return out
    raise StructuralError(f"unknown fixture generator {name!r}; choose from {', '.join(FIXTURES)}")
