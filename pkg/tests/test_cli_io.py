import json

import numpy as np
import pytest
from hypothesis import given

from hhs import io
from hhs.cli import main
from hhs.errors import StructuralError
from hhs.fixtures import product_of_trees_model, rel_hyp_signature
from hhs.metrics import WeightedGraph
from hhs.model import RealizedModel, verify_axioms
from hhs.signature import HhsSignature, validate_signature

from .strategies import connected_graphs, signatures


def run(argv, capsys):
    code = main(argv)
    out = capsys.readouterr().out
    return code, json.loads(out), out


@pytest.fixture
def files(tmp_path):
    for name, doc in io.generate_fixture("rel-hyp-signature", {"k": 2}).items():
        io.write_document(tmp_path / name, doc)
    for name, doc in io.generate_fixture("glued-flats", {"n": 4, "model": "false"}).items():
        io.write_document(tmp_path / name, doc)
    return tmp_path


def test_dumps_is_canonical():
    a = io.dumps({"b": 1, "a": [np.int64(2), np.float64(0.5), np.bool_(True)]})
    assert a == '{\n  "a": [\n    2,\n    0.5,\n    true\n  ],\n  "b": 1\n}\n'
    assert io.dumps({"x": float("nan")}) == '{\n  "x": null\n}\n'


def test_loads_rejects_garbage():
    with pytest.raises(StructuralError):
        io.loads("{not json")


def test_report_round_trip():
    rep = io.ReportDocument("sig validate", "pass", {"ok": True}, "abc", {"B": 7.0}, 3)
    again = io.ReportDocument.loads(rep.dumps())
    assert again == rep and again.exit_code == 0


@given(signatures())
def test_signature_document_round_trip(sig):
    assert HhsSignature.from_dict(io.loads(io.dumps(sig.to_dict()))) == sig


@given(connected_graphs(weighted=True))
def test_graph_document_round_trip(g):
    assert WeightedGraph.from_dict(io.loads(io.dumps(g.to_dict()))) == g


def test_model_document_round_trip():
    m = product_of_trees_model()
    doc = io.loads(io.dumps(m.to_dict()))
    assert RealizedModel.from_dict(doc).to_dict() == m.to_dict()


def test_fixtures_are_deterministic():
    for name, params in [("product-of-trees", {}), ("glued-flats", {"n": 4}), ("grid", {"rows": 3}),
                         ("random-graph", {"n": 12}), ("rel-hyp-signature", {"k": 3})]:
        a = io.generate_fixture(name, params, seed=5)
        b = io.generate_fixture(name, params, seed=5)
        assert io.dumps(a) == io.dumps(b)


def test_fixture_outputs_validate():
    docs = io.generate_fixture("product-of-trees", {"depth": 2, "valence": 3})
    assert verify_axioms(io.load_model(docs["model.json"])).ok
    assert validate_signature(io.load_signature(docs["signature.json"])).ok
    sig = io.load_signature(io.generate_fixture("rel-hyp-signature", {"k": 2})["signature.json"])
    assert sig == rel_hyp_signature(2)


def test_random_graph_seed_matters():
    a = io.generate_fixture("random-graph", {"n": 15}, seed=1)
    b = io.generate_fixture("random-graph", {"n": 15}, seed=2)
    assert a != b


@pytest.mark.parametrize("name, params", [("nope", {}), ("grid", {"rows": "x"}), ("grid", {"rows": 0}),
                                          ("custom", {})])
def test_bad_fixture_requests(name, params):
    with pytest.raises(StructuralError):
        io.generate_fixture(name, params)


def test_sig_validate_exit_codes(files, capsys, tmp_path):
    code, doc, _ = run(["sig", "validate", str(files / "signature.json")], capsys)
    assert code == 0 and doc["status"] == "pass"
    bad = json.loads((files / "signature.json").read_text())
    bad["complexity"] = 1
    (tmp_path / "bad.json").write_text(json.dumps(bad))
    code, doc, _ = run(["sig", "validate", str(tmp_path / "bad.json")], capsys)
    assert code == 1 and not doc["result"]["validation"]["checks"]["finite_complexity"]["passed"]


def test_structural_error_exit_code(tmp_path, capsys):
    (tmp_path / "broken.json").write_text('{"domains": [{"id": 3}], "maximal": 0}')
    code, doc, _ = run(["sig", "validate", str(tmp_path / "broken.json")], capsys)
    assert code == 2 and doc["status"] == "structural"
    code, _, _ = run(["model", "verify", str(tmp_path / "missing.json")], capsys)
    assert code == 2


def test_inconclusive_exit_code(files, capsys):
    code, doc, _ = run(["transform", "isolate", str(files / "signature.json"), "--limit", "1"], capsys)
    assert code == 3 and doc["status"] == "inconclusive"


def test_boundary_and_quotient_commands(files, capsys):
    sig = str(files / "signature.json")
    _, doc, _ = run(["boundary", "build", sig], capsys)
    assert doc["result"]["edges"] == [[2, 3], [5, 6]]
    _, doc, _ = run(["boundary", "eyries", sig, "--subset", "A1,B1"], capsys)
    assert doc["result"]["eyries"] == [2, 3]
    code, doc, _ = run(["quotient", sig, "--peripherals", "A1,B1;A2,B2"], capsys)
    assert code == 0 and len(doc["result"]["quotient"]["nodes"]) == 3
    _, doc, _ = run(["classify", sig], capsys)
    assert doc["result"]["verdict"] == "rel-hyp-candidate"
    _, doc, _ = run(["transform", "cusp-sig", sig], capsys)
    assert doc["result"]["index_set"] == [0, 1, 4]


def test_metric_and_cusp_commands(files, capsys):
    g = str(files / "graph.json")
    _, doc, _ = run(["metrics", "delta", g, "--exact"], capsys)
    assert doc["result"]["exact"] and doc["thresholds"]["exhaustive_limit"] is None
    _, doc, _ = run(["horoball", "verify", g], capsys)
    assert doc["result"]["adequate_depth"]
    code, doc, _ = run(["cusp", "proximity", g, "--peripherals", str(files / "peripherals.json"),
                        "--tolerance", "1"], capsys)
    assert code == 0 and doc["thresholds"]["tolerance"] == 1.0
    _, doc, _ = run(["thick", g, "--peripherals", str(files / "peripherals.json"), "--C", "1"], capsys)
    assert doc["thresholds"]["C"] == 1.0 and "threshold" in doc["thresholds"]


def test_out_flag_writes_file(files, tmp_path, capsys):
    target = tmp_path / "report.json"
    main(["boundary", "join", str(files / "signature.json"), "--out", str(target)])
    assert capsys.readouterr().out == ""
    assert json.loads(target.read_text())["result"]["join"] is False


def test_fixture_command_writes_files(tmp_path, capsys):
    code = main(["fixture", "grid", "--param", "rows=3", "--dir", str(tmp_path / "g")])
    capsys.readouterr()
    assert code == 0 and (tmp_path / "g" / "graph.json").is_file()


def test_pipeline_on_wide_signature_stops_at_classify(tmp_path, capsys):
    from hhs.fixtures import product_signature

    io.write_document(tmp_path / "sig.json", product_signature().to_dict())
    io.write_document(tmp_path / "cfg.json", {"signature": "sig.json", "stages": ["isolate", "classify", "quotient"]})
    code, doc, _ = run(["pipeline", str(tmp_path / "cfg.json")], capsys)
    assert code == 1  # isolation fails before classification on this signature
    io.write_document(tmp_path / "cfg.json", {"signature": "sig.json", "stages": ["classify", "quotient"]})
    code, doc, _ = run(["pipeline", str(tmp_path / "cfg.json")], capsys)
    assert code == 0 and doc["result"]["stopped_at"] == "classify"
    assert doc["result"]["stages"][-1]["verdict"] == "wide"


def test_pipeline_corrupted_model(tmp_path, capsys):
    (tmp_path / "model.json").write_text('{"signature": {}}')
    io.write_document(tmp_path / "cfg.json", {"model": "model.json"})
    code, doc, _ = run(["pipeline", str(tmp_path / "cfg.json")], capsys)
    assert code == 2 and doc["status"] == "structural"


def test_reports_embed_seed_and_digest(files, capsys):
    _, doc, _ = run(["metrics", "delta", str(files / "graph.json"), "--seed", "9"], capsys)
    assert doc["seed"] == 9 and len(doc["inputs_digest"]) == 64


def test_qc_reports_both_geodesic_modes(tmp_path, capsys):
    from hhs.fixtures import cycle_graph

    io.write_document(tmp_path / "c8.json", cycle_graph(8).to_dict())
    _, doc, _ = run(["metrics", "qc", str(tmp_path / "c8.json"), "--subset", "0,1,2,3,4"], capsys)
    # the far side of the cycle is a second 0-4 geodesic, vertex 6 sits 2 from the arc
    assert doc["result"]["some_geodesic"] == 0.0 and doc["result"]["every_geodesic"] == 2.0
    assert doc["result"]["constant"] == 0.0
