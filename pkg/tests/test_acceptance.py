"""The ten acceptance criteria, each exact with tolerance zero.

Every criterion is a function returning ``(ok, detail)`` so that the same
code runs under pytest (one test per criterion, summary lines printed at the
end of the session) and as a script::

    python tests/test_acceptance.py
"""

import sys
import time
from pathlib import Path

import pytest

sys.path.insert(0, str(Path(__file__).resolve().parent))

from pultrkit.adjoint import canonical_gamma, decompose_template, omega_apply, omega_composed, omega_vertex_apply
from pultrkit.core import DIGRAPH, Homomorphism, Structure, hom_equivalent, hom_exists, is_hom, order, path
from pultrkit.duals import dual_of_term
from pultrkit.formats import parse_structure, parse_template, parse_terms, print_structure, print_template, print_terms
from pultrkit.oracle import (
    check_adjunction,
    check_arc_graph_fixture,
    check_arc_structure_fixture,
    check_duality_pair,
    check_omega_v1_is_dual,
    check_oriented_path_fixture,
    enumerate_structures,
)
from pultrkit.pultr import gamma_apply, lambda_apply
from pultrkit.templates import path_template, stock_template
from pultrkit.terms import is_tree, path_term, term_of_tree, tree_of_term

from conftest import ACCEPTANCE, FIXTURES


def _digraphs(n):
    return enumerate_structures(DIGRAPH, n)


def _sweep(left, right, a_max, b_max):
    report = check_adjunction(left, right, _digraphs(a_max), _digraphs(b_max))
    detail = f"{report.checked} pairs, {report.failures} failures"
    if report.counterexample:
        a, b, _, _ = report.counterexample
        detail += f"; first at A={a!r} B={b!r}"
    return bool(report), detail


def criterion_1():
    tmpl, _ = stock_template("arc-graph")
    return _sweep(lambda a: lambda_apply(tmpl, a), lambda b: gamma_apply(tmpl, b), 3, 2)


def criterion_2():
    tmpl, terms = stock_template("arc-graph")
    return _sweep(lambda a: gamma_apply(tmpl, a), lambda b: omega_apply(tmpl, b, terms), 3, 2)


def criterion_3():
    tmpl, terms = stock_template("oriented-path")
    return _sweep(lambda a: gamma_apply(tmpl, a), lambda b: omega_apply(tmpl, b, terms), 3, 2)


def criterion_4():
    stream = list(_digraphs(4))
    parts, ok = [], True
    for k in (1, 2, 3):
        t = path_term(k)
        dual = dual_of_term(t, DIGRAPH)
        equiv = hom_equivalent(dual, order(k))
        report = check_duality_pair(tree_of_term(t, DIGRAPH).structure, dual, stream)
        ok &= equiv and bool(report)
        parts.append(f"k={k}: equiv L{k} {equiv}, {report.checked} digraphs {'ok' if report else report.reason}")
    return ok, "; ".join(parts)


def criterion_5():
    reports = {
        "arc-graph B<=3": check_arc_graph_fixture(3),
        "oriented-path H<=3": check_oriented_path_fixture(3),
        "arc-structure B<=2": check_arc_structure_fixture(2),
    }
    ok = all(reports.values())
    return ok, ", ".join(f"{k}: {r.checked} {'ok' if r else 'FAIL'}" for k, r in reports.items())


def _isomorphic_via_tree_round_trip(s: Structure) -> bool:
    if not is_tree(s):
        return False
    root = ("E", s.tuples("E")[0])
    back, bijection = term_of_tree(s, root)
    again = tree_of_term(back, DIGRAPH).structure
    f = Homomorphism(again, s, bijection)
    return is_hom(f) and len(set(bijection.values())) == len(s) and again.num_tuples() == s.num_tuples()


def criterion_6():
    tmpl, _ = stock_template("arc-graph")
    bad = []
    for n in range(1, 7):
        p = path(n)
        image = lambda_apply(tmpl, gamma_apply(tmpl, p))
        same_size = len(image) == len(p) and image.num_tuples() == p.num_tuples()
        mutual = hom_exists(image, p) and hom_exists(p, image)
        if not (same_size and _isomorphic_via_tree_round_trip(image) and mutual):
            bad.append(n)
    return not bad, "n=1..6 all isomorphic" if not bad else f"differs at n={bad}"


def criterion_7():
    report = check_omega_v1_is_dual(path_template(2), path_term(2))
    return bool(report), f"{len(report.bijection)} vertices" + ("" if report else f"; {report.reason}")


def criterion_8():
    tmpl, terms = stock_template("oriented-path")
    first, second = decompose_template(tmpl)
    gamma_bad, omega_bad, count = [], [], 0
    for b in _digraphs(2):
        count += 1
        if canonical_gamma(tmpl, b) != canonical_gamma(second, canonical_gamma(first, b), nested=True):
            gamma_bad.append(b)
        if not hom_equivalent(omega_composed(tmpl, b), omega_vertex_apply(tmpl, b, terms)):
            omega_bad.append(b)
    ok = not gamma_bad and not omega_bad
    return ok, f"{count} B: gamma literal mismatches {len(gamma_bad)}, omega inequivalent {len(omega_bad)}"


MUTATION_B = Structure(DIGRAPH, ["1", "2"], {"E": [("1", "2"), ("2", "1")]})


def criterion_9():
    """Every single-edge deletion of the arc-graph adjoint at the 2-cycle must
    be caught by the A <= 3 sweep of criterion 2."""
    tmpl, terms = stock_template("arc-graph")
    omega = omega_apply(tmpl, MUTATION_B, terms)
    a_list = list(_digraphs(3))
    lhs = [hom_exists(gamma_apply(tmpl, a), MUTATION_B) for a in a_list]
    edges = omega.tuples("E")
    missed = []
    for e in edges:
        mutant = Structure(DIGRAPH, omega.domain, {"E": [x for x in edges if x != e]})
        if not any(left != hom_exists(a, mutant) for a, left in zip(a_list, lhs)):
            missed.append(e)
    detail = f"{len(edges) - len(missed)}/{len(edges)} deletions caught with |A| <= 3"
    if missed:
        detail += f"; uncaught: {missed}"
    return not missed, detail


def criterion_10():
    files = sorted(p for p in FIXTURES.rglob("*") if p.is_file())
    bad = []
    for p in files:
        text = p.read_text(encoding="utf-8")
        if p.suffix == ".txt":
            again = print_structure(parse_structure(text))
        elif p.suffix == ".tmpl":
            again = print_template(*parse_template(text))
        elif p.suffix == ".term":
            again = print_terms(parse_terms(text))
        else:
            again = None
        if again != text:
            bad.append(p.name)
    return not bad and bool(files), f"{len(files) - len(bad)}/{len(files)} files byte-identical"


CRITERIA = {
    1: ("left-central adjunction sweep", criterion_1),
    2: ("edge-case right adjoint sweep", criterion_2),
    3: ("vertex-case right adjoint sweep", criterion_3),
    4: ("path duals and duality", criterion_4),
    5: ("closed-form fixtures", criterion_5),
    6: ("left of central of paths", criterion_6),
    7: ("right adjoint at one vertex is the dual", criterion_7),
    8: ("composition of templates", criterion_8),
    9: ("mutation guard", criterion_9),
    10: ("fixture file round trip", criterion_10),
}


def run_criterion(n):
    name, func = CRITERIA[n]
    start = time.perf_counter()
    ok, detail = func()
    detail = f"{detail} ({time.perf_counter() - start:.1f}s)"
    ACCEPTANCE[n] = (name, ok, detail)
    return ok, detail


@pytest.mark.parametrize("n", sorted(CRITERIA))
def test_criterion(n):
    ok, detail = run_criterion(n)
    assert ok, detail


if __name__ == "__main__":
    failed = 0
    for n in sorted(CRITERIA):
        ok, detail = run_criterion(n)
        failed += not ok
        print(f"criterion {n:2d} {'PASS' if ok else 'FAIL'}  {CRITERIA[n][0]}: {detail}", flush=True)
    sys.exit(1 if failed else 0)
