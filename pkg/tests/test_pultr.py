from itertools import product

import pytest
from hypothesis import assume, given
from hypothesis import strategies as st

from pultrkit.core import DIGRAPH, Signature, Structure, brute_force_homs, hom_exists, path
from pultrkit.oracle import enumerate_structures
from pultrkit.pultr import PultrTemplate, TemplateError, gamma_apply, hom_name, lambda_apply
from pultrkit.templates import (
    arc_graph_template,
    arc_structure_sample_graph,
    arc_structure_template,
    oriented_path_quaternary_template,
    oriented_path_template,
    path_template,
)

from strategies import structures


def gamma_oracle(tmpl: PultrTemplate, b: Structure) -> Structure:
    """Definition of the central functor, by trying every map."""
    homs = [tuple(f[p] for p in tmpl.P.domain) for f in brute_force_homs(tmpl.P, b)]
    names = {h: hom_name(tmpl, h) for h in homs}
    rels = {}
    for name, k in tmpl.target_sig:
        eps = [tmpl.epsilon[(name, i)] for i in range(1, k + 1)]
        rows = set()
        for g in brute_force_homs(tmpl.Q[name], b):
            rows.add(tuple(names[tuple(g[e[p]] for p in tmpl.P.domain)] for e in eps))
        rels[name] = rows
    return Structure(tmpl.target_sig, [names[h] for h in homs], rels)


STOCK = [arc_graph_template, oriented_path_template, arc_structure_template, oriented_path_quaternary_template,
         lambda: path_template(2)]


@pytest.mark.parametrize("make", STOCK)
def test_gamma_matches_definition(make):
    tmpl = make()
    for b in enumerate_structures(tmpl.source_sig, 2):
        assert gamma_apply(tmpl, b).same_up_to_order(gamma_oracle(tmpl, b))


def test_arc_graph_of_paths():
    tmpl = arc_graph_template()
    for n in range(1, 6):
        g = gamma_apply(tmpl, path(n))
        assert len(g) == n and g.num_tuples() == n - 1


def test_lambda_of_paths_follows_the_gluing():
    tmpl = arc_graph_template()
    image = lambda_apply(tmpl, path(2))
    assert image.domain == ("0:0", "0:1", "1:1", "2:1")
    assert set(image.tuples("E")) == {("0:0", "0:1"), ("0:1", "1:1"), ("1:1", "2:1")}


def test_arc_structure_of_the_sample_graph():
    g = gamma_apply(arc_structure_template(), arc_structure_sample_graph())
    assert set(g.domain) == {"(2,1)", "(3,1)", "(4,2)", "(2,5)"}
    assert g.relations["D"] == {("(4,2)", "(2,1)"), ("(4,2)", "(2,5)")}
    loops = {(x, x) for x in g.domain}
    assert g.relations["O"] == loops | {("(2,1)", "(2,5)"), ("(2,5)", "(2,1)")}
    assert g.relations["I"] == loops | {("(2,1)", "(3,1)"), ("(3,1)", "(2,1)")}


def test_template_validation():
    p = Structure(DIGRAPH, ["0", "1"], {"E": [("0", "1")]})
    q = Structure(DIGRAPH, ["a", "b"], {"E": [("a", "b")]})
    with pytest.raises(TemplateError, match="not a homomorphism"):
        PultrTemplate(DIGRAPH, DIGRAPH, p, {"E": q}, {("E", 1): {"0": "b", "1": "a"}, ("E", 2): {"0": "a", "1": "b"}})
    with pytest.raises(TemplateError, match="missing epsilon"):
        PultrTemplate(DIGRAPH, DIGRAPH, p, {"E": q}, {("E", 1): {"0": "a", "1": "b"}})
    with pytest.raises(TemplateError, match="no Q"):
        PultrTemplate(DIGRAPH, DIGRAPH, p, {}, {})


def test_element_gadget_shape():
    assert oriented_path_template().p_is_vertex
    assert arc_graph_template().p_edge_symbol() == "E"
    loop_p = Structure(DIGRAPH, ["0"], {"E": [("0", "0")]})
    q = Structure(DIGRAPH, ["0"], {"E": [("0", "0")]})
    t = PultrTemplate(DIGRAPH, DIGRAPH, loop_p, {"E": q}, {("E", 1): {"0": "0"}, ("E", 2): {"0": "0"}})
    assert t.p_edge_symbol() is None and not t.p_is_vertex


@st.composite
def templates(draw):
    p = draw(structures(DIGRAPH, max_size=2, min_size=1))
    q = draw(structures(DIGRAPH, max_size=3, min_size=1))
    maps = [dict(f) for f in brute_force_homs(p, q)]
    assume(maps)
    e1, e2 = draw(st.sampled_from(maps)), draw(st.sampled_from(maps))
    return PultrTemplate(DIGRAPH, DIGRAPH, p, {"E": q}, {("E", 1): e1, ("E", 2): e2})


@given(templates(), structures(DIGRAPH, max_size=3), structures(DIGRAPH, max_size=2))
def test_left_and_central_functors_are_adjoint(tmpl, a, b):
    assert hom_exists(lambda_apply(tmpl, a), b) == hom_exists(a, gamma_apply(tmpl, b))


@given(templates(), structures(DIGRAPH, max_size=2))
def test_gamma_random_templates_match_definition(tmpl, b):
    assert gamma_apply(tmpl, b).same_up_to_order(gamma_oracle(tmpl, b))


def test_signature_changing_template():
    tmpl = oriented_path_quaternary_template()
    assert tmpl.target_sig == Signature((("R", 4),))
    # gadget 1 -> 0, 1 -> 2 -> 3 attached at 0, 1, 2, 3 in that order
    g = gamma_apply(tmpl, path(3))
    assert g.relations["R"] == {("1", "0", "1", "2"), ("2", "1", "2", "3")}
    for a, b in product(list(enumerate_structures(tmpl.target_sig, 1)), list(enumerate_structures(DIGRAPH, 2))):
        assert hom_exists(lambda_apply(tmpl, a), b) == hom_exists(a, gamma_apply(tmpl, b))
