from itertools import product

import numpy as np
import pytest
from hypothesis import given
from hypothesis import strategies as st

from pultrkit.core import (
    DIGRAPH,
    Homomorphism,
    Signature,
    SignatureError,
    SignatureMismatch,
    Structure,
    StructureError,
    brute_force_homs,
    compose,
    disjoint_union,
    edge_action,
    enumerate_homs,
    find_hom,
    hom_equivalent,
    hom_exists,
    is_hom,
    iter_homs,
    loop,
    order,
    path,
    project_homs,
    single_edge,
    stock,
    validate,
)

from strategies import MIXED, structures


def test_signature_rejects_bad_symbols():
    with pytest.raises(SignatureError):
        Signature((("V", 2),))
    with pytest.raises(SignatureError):
        Signature((("E", 2), ("E", 3)))
    with pytest.raises(SignatureError):
        Signature((("E", 0),))
    with pytest.raises(SignatureError):
        Signature((("E-1", 2),))


def test_signature_fresh_symbol_and_extend():
    sig = Signature((("S", 1), ("S1", 2)))
    assert sig.fresh_symbol("S") == "S2"
    assert sig.extend("R", 3).arity("R") == 3
    assert str(sig) == "S:1 S1:2"


def test_validate_lists_every_problem():
    problems = validate(DIGRAPH, ["a", "a"], {"E": [("a", "b"), ("a",)], "F": []})
    assert any("duplicate" in p for p in problems)
    assert any("'b' not in domain" in p for p in problems)
    assert any("arity" in p for p in problems)
    assert any("not in signature" in p for p in problems)
    with pytest.raises(StructureError):
        Structure(DIGRAPH, ["a"], {"E": [("a", "b")]})


def test_structure_dedups_and_sorts_tuples():
    s = Structure(DIGRAPH, ["b", "a"], {"E": [("a", "b"), ("b", "a"), ("a", "b")]})
    assert s.tuples("E") == [("b", "a"), ("a", "b")]
    assert s.num_tuples() == 2


def test_reorder_relabel_substructure():
    s = path(3)
    r = s.reorder(["3", "2", "1", "0"])
    assert r != s and r.same_up_to_order(s)
    relabeled = s.relabel({x: "x" + x for x in s.domain})
    assert relabeled.tuples("E")[0] == ("x0", "x1")
    sub = s.substructure(["0", "1", "3"])
    assert sub.domain == ("0", "1", "3") and sub.tuples("E") == [("0", "1")]


def test_homomorphism_checks_and_composes():
    p2, l2 = path(2), order(2)
    assert not is_hom(Homomorphism(p2, l2, {"0": "1", "1": "2", "2": "2"}))
    f = Homomorphism(path(1), p2, {"0": "1", "1": "2"})
    g = Homomorphism(p2, order(3), {"0": "1", "1": "2", "2": "3"})
    assert is_hom(f) and is_hom(g)
    h = compose(g, f)
    assert h.mapping == {"0": "2", "1": "3"} and is_hom(h)
    assert edge_action(f, "E") == {("0", "1"): ("1", "2")}


def test_signature_mismatch_raises():
    with pytest.raises(SignatureMismatch):
        hom_exists(path(1), single_edge(MIXED, "T"))


def test_classic_homs():
    assert hom_exists(path(3), order(4)) and not hom_exists(path(3), order(3))
    assert hom_exists(order(3), loop())
    assert not hom_exists(loop(), order(5))
    assert len(enumerate_homs(path(1), order(3))) == 3
    assert find_hom(path(2), order(3), pre={"0": "2"}) is None


def test_hint_is_verified_before_use():
    bad = {"0": "1", "1": "1"}
    assert find_hom(path(1), order(2), hint=bad) == {"0": "1", "1": "2"}
    good = {"0": "1", "1": "3"}
    assert find_hom(path(1), order(3), hint=good) == good


def test_empty_structures():
    empty = Structure(DIGRAPH, [])
    assert hom_exists(empty, empty) and hom_exists(empty, path(1))
    assert not hom_exists(path(1), empty)
    assert list(iter_homs(empty, path(1))) == [()]


def test_disjoint_union_tags_ids():
    u, inj = disjoint_union([path(1), loop()])
    assert u.domain == ("0:0", "0:1", "1:0")
    assert set(u.tuples("E")) == {("0:0", "0:1"), ("1:0", "1:0")}
    assert inj[1] == {"0": "1:0"}


def test_stock_structures():
    assert stock("L", 3) == order(3)
    assert stock("P", 2) == path(2)
    assert len(stock("V1")) == 1
    assert stock("S1", "T", MIXED).tuples("T") == [("1", "2", "3")]


@given(structures(MIXED, max_size=3), structures(MIXED, max_size=3))
def test_solver_matches_brute_force(a, b):
    expected = sorted(tuple(f[x] for x in a.domain) for f in brute_force_homs(a, b))
    found = sorted(tuple(b.domain[j] for j in sol) for sol in iter_homs(a, b))
    assert found == expected
    assert hom_exists(a, b) == bool(expected)


@given(structures(DIGRAPH, max_size=4), structures(DIGRAPH, max_size=3), st.data())
def test_projection_matches_brute_force(a, b, data):
    keys = data.draw(st.lists(st.sampled_from(a.domain), unique=True)) if a.domain else []
    expected = {tuple(f[x] for x in keys) for f in brute_force_homs(a, b)}
    assert project_homs(a, b, keys) == expected


@given(structures(DIGRAPH, max_size=4), structures(DIGRAPH, max_size=3))
def test_every_found_hom_is_a_hom(a, b):
    f = find_hom(a, b)
    if f is not None:
        assert is_hom(Homomorphism(a, b, f))


@given(structures(DIGRAPH, max_size=3))
def test_equivalence_is_reflexive(a):
    assert hom_equivalent(a, a)


def test_large_target_adjacency_fallback():
    n = 9000
    dom = [str(i) for i in range(n)]
    big = Structure.from_indices(DIGRAPH, dom, {"E": np.array([[i, i + 1] for i in range(n - 1)])})
    assert hom_exists(path(5), big)
    assert not hom_exists(loop(), big)


def test_ternary_propagation():
    sig = Signature((("T", 3),))
    a = Structure(sig, ["x", "y", "z"], {"T": [("x", "y", "z"), ("y", "z", "x")]})
    dom = ["1", "2", "3"]
    b = Structure(sig, dom, {"T": [t for t in product(dom, repeat=3) if len(set(t)) == 3 and t[0] < t[1]]})
    expected = list(brute_force_homs(a, b))
    assert bool(expected) == hom_exists(a, b)
