import pytest
from hypothesis import given

from hhs.boundary import build_boundary_complex
from hhs.classify import (ThickParams, classify_geometry, eyrie_wideness, malnormality_diagnostic,
                          marching_sequence, quotient_boundary, rel_hyp_boundary_check, thick_chain_audit,
                          translates, verify_quotient_against_cusp)
from hhs.errors import StructuralError
from hhs.fixtures import GluedFlats, block_swap_action, grid_graph, path_graph, product_signature, rel_hyp_signature
from hhs.horocusp import PeripheralSystem, build_cusped_space
from hhs.signature import Domain, HhsSignature, validate_signature

from .strategies import signatures


def test_translates_under_swap():
    gens = [[0, 4, 5, 6, 1, 2, 3]]
    assert translates([2, 3], gens) == [frozenset({2, 3}), frozenset({5, 6})]
    assert translates([2, 3], []) == [frozenset({2, 3})]


def test_rel_hyp_certificate():
    cert = rel_hyp_boundary_check(rel_hyp_signature(2), None, [[2, 3], [5, 6]])
    assert cert.certified and cert.residual == [0]
    assert cert.conditions["1"]["status"] == "trusted"


def test_residual_edge_breaks_condition_four():
    sig = rel_hyp_signature(2)
    extra = HhsSignature(sig.domains, sig.nest_closure(), set(sig.orth) | {(0, 2)}, 0, 3)
    cert = rel_hyp_boundary_check(extra, None, [[2, 3], [5, 6]])
    assert not cert.certified
    assert cert.witnesses["4"] == {"edge": [0, 2]}


def test_overlapping_lambdas_break_condition_three():
    cert = rel_hyp_boundary_check(rel_hyp_signature(2), None, [[2, 3], [2, 3, 5, 6]])
    assert cert.conditions["3"]["status"] == "fail"
    assert cert.witnesses["3"]["domain"] == 2


def test_swap_action_translates_are_consistent():
    sig = rel_hyp_signature(2, action=block_swap_action(2))
    cert = rel_hyp_boundary_check(sig, None, [[2, 3]])
    assert cert.certified and len(cert.translates) == 2


def test_non_downward_closed_lambda():
    sig = rel_hyp_signature(2, peripheral_unbounded=True)
    with pytest.raises(StructuralError):
        rel_hyp_boundary_check(sig, None, [[1]])


def test_quotient_examples():
    bc = build_boundary_complex(rel_hyp_signature(2))
    qc = quotient_boundary(bc, [[2, 3], [5, 6]])
    assert len(qc.nodes) == 3
    assert qc.fibers() == {0: [2, 3], 1: [5, 6], 2: [0]}
    ident = quotient_boundary(bc, [])
    assert len(ident.nodes) == len(bc.classes)
    whole = quotient_boundary(bc, [list(bc.classes)])
    assert len(whole.nodes) == 1
    with pytest.raises(StructuralError):
        quotient_boundary(bc, [[2, 3], [3, 5]])


def test_classify_wide():
    v = classify_geometry(product_signature())
    assert v.verdict == "wide" and v.evidence["join"] == [[1], [2]]


def test_classify_rel_hyp_suppresses_thickness():
    v = classify_geometry(rel_hyp_signature(2))
    assert v.verdict == "rel-hyp-candidate"
    assert v.evidence["invariant_positive_components"]
    assert "thickness_suppressed" in v.evidence


def test_classify_edgeless_is_indeterminate():
    sig = HhsSignature([Domain(0), Domain(1), Domain(2)], [(1, 0), (2, 0)], (), 0, 2)
    v = classify_geometry(sig)
    assert v.verdict == "indeterminate" and "hyperbolic-like" in v.evidence["note"]


def test_classify_thick():
    # two orthogonal pairs sharing no isolating container: only S contains them
    doms = [Domain(0)] + [Domain(i) for i in range(1, 5)]
    sig = HhsSignature(doms, [(i, 0) for i in range(1, 5)], [(1, 2), (3, 4)], 0, 2)
    v = classify_geometry(sig)
    assert v.verdict == "thick-order-1-candidate"


def test_eyrie_wideness():
    assert eyrie_wideness(product_signature(), [1, 2])["wide"]
    assert not eyrie_wideness(product_signature(), [1])["wide"]
    tv = HhsSignature([Domain(0), Domain(1), Domain(2)], [(1, 0), (2, 0)], (), 0, 2)
    with pytest.raises(StructuralError):
        eyrie_wideness(tv, [1, 2])


def test_thick_whole_space():
    g = grid_graph(4)
    rep = thick_chain_audit(g, [range(16)], ThickParams(C=0))
    assert rep.cover_defect == 0 and rep.chain_connected and rep.certified


def test_thick_glued_flats():
    gf = GluedFlats(6, glue=6)
    rep = thick_chain_audit(gf.graph, [gf.flat1, gf.flat2], ThickParams(C=1, threshold=5))
    assert rep.cover_defect == 0 and rep.chain_edges and rep.certified


def test_thick_grid_rows():
    g = grid_graph(5)
    rows = [list(range(5 * r, 5 * r + 5)) for r in range(5)]
    assert not thick_chain_audit(g, rows, ThickParams(C=0)).certified
    rep = thick_chain_audit(g, rows, ThickParams(C=1))
    assert rep.certified
    strong = thick_chain_audit(g, rows, ThickParams(C=1, tau=4)).strong
    # rows 0 and 3 are 3C-close but need row 1 or 2 in between
    assert strong["certified"] and strong["longest_chain"] == 2


def test_malnormality():
    g = grid_graph(3, 12)
    left = [r * 12 + c for r in range(3) for c in range(3)]
    right = [r * 12 + c for r in range(3) for c in range(9, 12)]
    assert not malnormality_diagnostic(g.distances(), [left, right], C=1).flags
    gf = GluedFlats(6, glue=6)
    flagged = malnormality_diagnostic(gf.graph.distances(), [gf.flat1, gf.flat2], C=0, threshold=3)
    assert flagged.flags[0]["pair"] == [0, 1]
    twice = malnormality_diagnostic(gf.graph.distances(), [gf.flat1, gf.flat1], C=1)
    assert twice.exempt == [[0, 1]] and not twice.flags


def test_marching_sequence_doubles():
    d = path_graph(20).distances()
    assert marching_sequence(d, range(20), 0) == [1, 2, 4, 8, 16]


def test_quotient_against_cusp_small():
    gf = GluedFlats(5)
    cs = build_cusped_space(gf.graph, PeripheralSystem([gf.flat1, gf.flat2]))
    rep = verify_quotient_against_cusp(cs, x0=0)
    assert rep.sequences[0]["strictly_increasing"]
    bc = build_boundary_complex(rel_hyp_signature(3))
    wrong = quotient_boundary(bc, [[2, 3], [5, 6], [8, 9]])
    with pytest.raises(StructuralError):
        verify_quotient_against_cusp(cs, wrong)


@given(signatures())
def test_wide_and_rel_hyp_are_exclusive(sig):
    if not validate_signature(sig).ok:
        return
    v = classify_geometry(sig)
    if v.verdict == "wide":
        rel = v.evidence.get("rel_hyp")
        assert rel is None or not (rel["certified"] and rel["residual"])


@given(signatures())
def test_verdict_invariant_under_relabelling(sig):
    if not validate_signature(sig).ok:
        return
    perm = [0] + list(range(sig.n - 1, 0, -1))
    assert classify_geometry(sig).verdict == classify_geometry(sig.relabel(perm)).verdict
