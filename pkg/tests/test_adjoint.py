from itertools import product
from math import prod

import pytest
from hypothesis import assume, given
from hypothesis import strategies as st

from pultrkit.adjoint import (
    BudgetExceeded,
    admits_decomposition,
    admits_edge_case,
    admits_vertex_case,
    build_omega,
    canonical_gamma,
    core_of,
    decompose_template,
    default_terms,
    enumerate_edge_terms,
    hom_into_omega,
    necessary_condition_check,
    omega_apply,
    omega_composed,
    omega_edge_apply,
    omega_vertex_apply,
    represents,
)
from pultrkit.core import DIGRAPH, Signature, Structure, hom_equivalent, hom_exists, loop, order, path
from pultrkit.oracle import enumerate_structures
from pultrkit.pultr import PultrTemplate, TemplateError, gamma_apply
from pultrkit.templates import ARC_STRUCTURE_SIG, stock_template
from pultrkit.terms import is_tree, parse_term, strip_pr, tree_of_term

from strategies import edge_terms, structures

TWO_CYCLE = Structure(DIGRAPH, ["1", "2"], {"E": [("1", "2"), ("2", "1")]})


def reference_check(result) -> int:
    """Count tuples where the vectorized relation disagrees with the
    per-tuple evaluation of the definitions (witness included)."""
    s = result.structure
    bad = 0
    for sym, k in result.template.source_sig:
        rel = s.relations[sym]
        for tup in product(s.domain, repeat=k):
            ok, witness = result.check_tuple(sym, [s.index[x] for x in tup])
            if ok != (tup in rel):
                bad += 1
            elif ok and result.check_symbol == sym and result.witness(sym, tup) != witness:
                bad += 1
    return bad


@pytest.mark.parametrize("name, b", [
    ("oriented-path", Structure(DIGRAPH, ["1", "2"], {"E": [("1", "2"), ("2", "2")]})),
    ("oriented-path", TWO_CYCLE),
    ("arc-graph", order(3)),
    ("arc-graph", TWO_CYCLE),
    ("arc-structure", Structure(ARC_STRUCTURE_SIG, ["1", "2"],
                                {"D": [("1", "2")], "I": [("1", "1"), ("2", "2"), ("1", "2")],
                                 "O": [("2", "1"), ("1", "1")]})),
    ("path-2", loop()),
])
def test_vectorized_edges_match_definitions(name, b):
    tmpl, terms = stock_template(name)
    assert reference_check(build_omega(tmpl, b, terms=terms)) == 0


@pytest.mark.parametrize("b", [path(1), loop(), order(2)])
def test_unary_check_symbol_edges_match_definitions(b):
    _, glue = decompose_template(stock_template("oriented-path")[0])
    assert glue.p_edge_symbol() == "S" and glue.source_sig.arity("S") == 1
    assert reference_check(build_omega(glue, b)) == 0


def ternary_template() -> PultrTemplate:
    sig = Signature((("T", 3),))
    p = Structure(sig, ["a", "b", "c"], {"T": [("a", "b", "c")]})
    q = Structure(sig, ["1", "2", "3", "4", "5"], {"T": [("1", "2", "3"), ("3", "4", "5")]})
    eps = {("R", 1): {"a": "1", "b": "2", "c": "3"}, ("R", 2): {"a": "3", "b": "4", "c": "5"}}
    return PultrTemplate(sig, Signature((("R", 2),)), p, {"R": q}, eps)


def test_ternary_source_edges_match_definitions():
    tmpl = ternary_template()
    assert admits_edge_case(tmpl)
    b = Structure(tmpl.target_sig, ["x", "y"], {"R": [("x", "y"), ("y", "y")]})
    assert reference_check(build_omega(tmpl, b)) == 0


def test_vertex_count_is_the_product_of_subset_counts():
    tmpl, terms = stock_template("oriented-path")
    b = order(3)
    r = build_omega(tmpl, b, terms=terms)
    sizes = [len(r.homs[strip_pr(t)]) for t in r.vertex_terms]
    expected = sizes[0] * prod(2 ** n for n in sizes[1:])
    assert len(r.structure) == expected == 3 * 2**9


def test_budget_is_enforced(monkeypatch):
    tmpl, terms = stock_template("oriented-path")
    with pytest.raises(BudgetExceeded) as err:
        build_omega(tmpl, order(3), terms=terms, budget=100)
    assert err.value.needed == 1536
    monkeypatch.setenv("PULTR_BUDGET", "50")
    with pytest.raises(BudgetExceeded):
        omega_vertex_apply(tmpl, order(3), terms)
    with pytest.raises(BudgetExceeded):
        build_omega(tmpl, order(2), terms=terms, budget=10**6, tuple_budget=10)


def test_pruned_omega_is_equivalent_and_smaller():
    for name in ("oriented-path", "arc-graph"):
        tmpl, terms = stock_template(name)
        for b in enumerate_structures(DIGRAPH, 2):
            full = omega_apply(tmpl, b, terms)
            pruned = omega_apply(tmpl, b, terms, prune_a3=True)
            assert len(pruned) <= len(full)
            assert hom_equivalent(full, pruned)


def test_case_preconditions():
    arc, _ = stock_template("arc-graph")
    path_tmpl, _ = stock_template("oriented-path")
    assert admits_edge_case(arc) and not admits_vertex_case(arc)
    assert admits_vertex_case(path_tmpl) and not admits_edge_case(path_tmpl)
    with pytest.raises(TemplateError):
        build_omega(arc, TWO_CYCLE, "vertex")
    triangle = Structure(DIGRAPH, ["0", "1", "2"], {"E": [("0", "1"), ("1", "2"), ("2", "0")]})
    bad = PultrTemplate(DIGRAPH, DIGRAPH, Structure(DIGRAPH, ["0"]), {"E": triangle},
                        {("E", 1): {"0": "0"}, ("E", 2): {"0": "1"}})
    assert not admits_vertex_case(bad)
    assert not admits_decomposition(bad)
    with pytest.raises(TemplateError):
        build_omega(bad, loop())


def test_terms_must_represent_the_gadget():
    tmpl, _ = stock_template("oriented-path")
    with pytest.raises(TemplateError, match="does not represent"):
        build_omega(tmpl, loop(), terms={"E": parse_term("edge_E(vertex,vertex)")})
    q = tmpl.Q["E"]
    assert represents(default_terms(tmpl)["E"], q)
    assert represents(parse_term("edge_E(pr_1(edge_E(vertex,vertex)),pr_1(edge_E(vertex,vertex)))"), q)


def test_explicit_and_default_terms_agree_up_to_equivalence():
    tmpl, terms = stock_template("oriented-path")
    # the complete 2-vertex digraph gives an 8192-vertex side; skipped for time
    for b in enumerate_structures(DIGRAPH, 2):
        if b.num_tuples() <= 3:
            assert hom_equivalent(omega_vertex_apply(tmpl, b, terms), omega_vertex_apply(tmpl, b))


def test_edge_case_witness_is_least():
    tmpl, terms = stock_template("arc-graph")
    r = build_omega(tmpl, TWO_CYCLE, terms=terms)
    for tup in r.structure.tuples("E"):
        ok, least = r.check_tuple("E", [r.structure.index[x] for x in tup])
        assert ok and r.witness("E", tup) == least


def test_hom_into_omega_methods_agree():
    tmpl, terms = stock_template("arc-graph")
    for a in enumerate_structures(DIGRAPH, 2):
        for b in enumerate_structures(DIGRAPH, 2):
            assert hom_into_omega(a, tmpl, b, "materialize", terms) == hom_into_omega(a, tmpl, b, "gamma")


@pytest.mark.parametrize("name", ["oriented-path", "arc-structure", "arc-graph"])
def test_decomposition_reproduces_gamma(name):
    tmpl, _ = stock_template(name)
    first, second = decompose_template(tmpl)
    assert admits_vertex_case(first) and admits_edge_case(second)
    mark = second.p_edge_symbol()
    assert mark not in tmpl.source_sig and second.source_sig.arity(mark) == len(tmpl.P)
    for b in enumerate_structures(tmpl.source_sig, 2):
        assert canonical_gamma(tmpl, b) == canonical_gamma(second, canonical_gamma(first, b), nested=True)


def test_composed_adjoint_for_arc_structures():
    import random

    tmpl, terms = stock_template("arc-structure")
    pool = list(enumerate_structures(ARC_STRUCTURE_SIG, 2))
    for b in random.Random(3).sample(pool, 20):
        assert hom_equivalent(omega_composed(tmpl, b), omega_edge_apply(tmpl, b, terms))


def test_decomposition_rejects_overlapping_attachments():
    p = Structure(DIGRAPH, ["0", "1"], {"E": [("0", "1")]})
    q = Structure(DIGRAPH, ["0", "1"], {"E": [("0", "1")]})
    same = {"0": "0", "1": "1"}
    tmpl = PultrTemplate(DIGRAPH, DIGRAPH, p, {"E": q}, {("E", 1): same, ("E", 2): same})
    assert not admits_decomposition(tmpl)
    with pytest.raises(TemplateError):
        decompose_template(tmpl)


def test_enumerate_edge_terms_counts():
    # digraph edge terms with n edge nodes: 1, 4, 20 (by direct count of shapes)
    counts = [sum(1 for t in enumerate_edge_terms(DIGRAPH, n)) for n in (1, 2, 3)]
    assert counts[0] == 1 and counts[1] - counts[0] == 4 and counts[2] - counts[1] == 20


def test_core_of_known_structures():
    assert len(core_of(order(3).reorder(["3", "1", "2"]))) == 3
    two_paths = Structure(DIGRAPH, ["a", "b", "c", "d"], {"E": [("a", "b"), ("c", "d"), ("b", "d")]})
    assert len(core_of(two_paths)) == 3
    assert len(core_of(Structure(DIGRAPH, ["0", "1"], {"E": [("0", "0"), ("0", "1")]}))) == 1


def test_necessary_condition():
    for name in ("arc-graph", "oriented-path", "arc-structure"):
        assert necessary_condition_check(stock_template(name)[0], max_edges=3).status == "pass"
    triangle = Structure(DIGRAPH, ["0", "1", "2"], {"E": [("0", "1"), ("1", "2"), ("2", "0")]})
    bad = PultrTemplate(DIGRAPH, DIGRAPH, Structure(DIGRAPH, ["0"]), {"E": triangle},
                        {("E", 1): {"0": "0"}, ("E", 2): {"0": "1"}})
    report = necessary_condition_check(bad, max_edges=2)
    assert report.status == "fail" and not is_tree(core_of(report.image))
    assert necessary_condition_check(stock_template("arc-graph")[0], max_edges=3, max_trees=2).status == "budget"


@st.composite
def tree_templates(draw):
    term = draw(edge_terms(DIGRAPH, max_leaves=3))
    q = tree_of_term(term, DIGRAPH).structure
    assume(q.num_tuples() <= 3)
    if draw(st.booleans()):
        p = Structure(DIGRAPH, ["0"])
        maps = [{"0": x} for x in q.domain]
    else:
        p = Structure(DIGRAPH, ["0", "1"], {"E": [("0", "1")]})
        maps = [{"0": x, "1": y} for x, y in q.tuples("E")]
    e1, e2 = draw(st.sampled_from(maps)), draw(st.sampled_from(maps))
    return PultrTemplate(DIGRAPH, DIGRAPH, p, {"E": q}, {("E", 1): e1, ("E", 2): e2})


@given(tree_templates(), structures(DIGRAPH, max_size=3), structures(DIGRAPH, max_size=2))
def test_right_adjoint_on_random_tree_templates(tmpl, a, b):
    try:
        omega = omega_apply(tmpl, b, budget=4096)
    except BudgetExceeded:
        assume(False)
    assert hom_exists(gamma_apply(tmpl, a), b) == hom_exists(a, omega)


def test_every_edge_of_the_arc_adjoint_matters_with_four_vertex_inputs():
    # the adjoint at the 2-cycle is a core, so each deletion is detectable;
    # the source-to-sink edge first shows up against the 4-vertex tournament
    tmpl, terms = stock_template("arc-graph")
    omega = omega_apply(tmpl, TWO_CYCLE, terms)
    assert len(core_of(omega)) == len(omega)
    edges = omega.tuples("E")
    needed = []
    for e in edges:
        mutant = Structure(DIGRAPH, omega.domain, {"E": [x for x in edges if x != e]})
        first = next(a for a in enumerate_structures(DIGRAPH, 4)
                     if hom_exists(gamma_apply(tmpl, a), TWO_CYCLE) != hom_exists(a, mutant))
        needed.append(len(first))
    assert sorted(needed) == [2, 2, 3, 3, 3, 3, 4]
