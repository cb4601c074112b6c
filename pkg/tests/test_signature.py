import pytest
from hypothesis import given

from hhs.errors import ActionError, StructuralError, UnknownDomainError
from hhs.fixtures import block_swap_action, product_signature, rel_hyp_signature
from hhs.signature import (NESTED_DOWN, NESTED_UP, ORTHOGONAL, TRANSVERSE, Domain, GroupActionSpec,
                           HhsSignature, check_action, level, relation_of, validate_signature)

from .strategies import signatures


def chain(n):
    return HhsSignature([Domain(i) for i in range(n)], [(i + 1, i) for i in range(n - 1)], (), 0, n)


def test_product_signature_is_valid():
    rep = validate_signature(product_signature())
    assert rep.ok, rep.to_dict()


def test_rel_hyp_signature_is_valid():
    assert validate_signature(rel_hyp_signature(3)).ok


def test_relations_on_product():
    sig = product_signature()
    assert relation_of(sig, 1, 0) == NESTED_UP
    assert relation_of(sig, 0, 1) == NESTED_DOWN
    assert relation_of(sig, 1, 2) == ORTHOGONAL


def test_transverse_is_derived():
    sig = HhsSignature([Domain(0), Domain(1), Domain(2)], [(1, 0), (2, 0)], (), 0, 2)
    assert sig.transverse(1, 2)
    assert relation_of(sig, 1, 2) == TRANSVERSE


def test_chain_longer_than_complexity_fails():
    sig = HhsSignature([Domain(i) for i in range(4)], [(i + 1, i) for i in range(3)], (), 0, 2)
    rep = validate_signature(sig)
    assert rep.failed() == ["finite_complexity"]


def test_cycle_in_nesting_fails_antisymmetry():
    sig = HhsSignature([Domain(0), Domain(1), Domain(2)], [(1, 0), (2, 1), (1, 2)], (), 0, 3)
    assert "nesting" in validate_signature(sig).failed()


def test_orthogonal_and_nested_is_rejected():
    sig = HhsSignature([Domain(0), Domain(1), Domain(2)], [(1, 0), (2, 1)], [(1, 2)], 0, 3)
    rep = validate_signature(sig)
    assert "orthogonality" in rep.failed()
    assert rep.checks["orthogonality"].witnesses


def test_orthogonality_must_pass_downward():
    # A ⊥ B but a child of A is not orthogonal to B
    sig = HhsSignature([Domain(i) for i in range(4)], [(1, 0), (2, 0), (3, 1)], [(1, 2)], 0, 3)
    assert "orthogonality" in validate_signature(sig).failed()


def test_missing_container_is_reported():
    # A, B ⊥ U inside S, but no proper subdomain of S holds both
    doms = [Domain(0, True, "S"), Domain(1, True, "U"), Domain(2, True, "A"), Domain(3, True, "B")]
    sig = HhsSignature(doms, [(1, 0), (2, 0), (3, 0)], [(1, 2), (1, 3)], 0, 2)
    rep = validate_signature(sig)
    assert rep.failed() == ["containers"]
    w = rep.checks["containers"].witnesses[0]
    assert w["U"] == 1 and w["W"] == 0


def test_ids_must_be_contiguous():
    with pytest.raises(StructuralError):
        HhsSignature([Domain(0), Domain(2)])


def test_unknown_domain_in_relation():
    with pytest.raises(UnknownDomainError):
        HhsSignature([Domain(0), Domain(1)], [(1, 5)])


def test_level_counts_chain_elements():
    sig = chain(4)
    assert [level(sig, i) for i in range(4)] == [1, 2, 3, 4]


def test_round_trip_keeps_relations():
    sig = rel_hyp_signature(2, action=block_swap_action(2))
    again = HhsSignature.from_dict(sig.to_dict())
    assert again == sig
    assert again.to_dict() == sig.to_dict()


def test_serialized_nesting_is_the_reduction():
    doc = chain(4).to_dict()
    assert doc["nest"] == [[1, 0], [2, 1], [3, 2]]


def test_block_swap_preserves_relations():
    sig = rel_hyp_signature(2)
    rep = check_action(sig, block_swap_action(2))
    assert rep.ok
    assert [1, 4] not in rep.orbits  # bounded I-domains stay out of the unbounded orbits
    assert [2, 5] in rep.orbits and [3, 6] in rep.orbits


def test_action_breaking_orthogonality():
    sig = product_signature()
    # swapping S with A cannot preserve nesting
    rep = check_action(sig, GroupActionSpec([[1, 0, 2]]))
    assert not rep.ok
    assert rep.per_generator[0]["nest"] is False


def test_non_bijection_raises():
    with pytest.raises(ActionError):
        check_action(product_signature(), GroupActionSpec([[0, 0, 2]]))


@given(signatures())
def test_closure_is_transitive(sig):
    for u in sig.ids:
        for v in sig.ids:
            for w in sig.ids:
                if sig.nested(u, v) and sig.nested(v, w):
                    assert sig.nested(u, w)


@given(signatures())
def test_relations_are_mutually_exclusive(sig):
    for a in sig.ids:
        for b in sig.ids:
            if a == b:
                continue
            kinds = [sig.properly_nested(a, b), sig.properly_nested(b, a), sig.orthogonal(a, b),
                     sig.transverse(a, b)]
            assert sum(kinds) == 1


@given(signatures())
def test_round_trip_property(sig):
    assert HhsSignature.from_dict(sig.to_dict()) == sig


@given(signatures())
def test_relabel_preserves_validity(sig):
    perm = list(range(sig.n))[::-1]
    assert validate_signature(sig).ok == validate_signature(sig.relabel(perm)).ok
