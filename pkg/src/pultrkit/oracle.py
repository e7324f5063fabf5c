"""Exhaustive enumeration, law checkers, and reference constructions.

The reference constructions (``fixture_*``) are written out directly from
their closed-form descriptions and share no code with :mod:`pultrkit.adjoint`,
so comparing them against the general construction is a genuine cross-check.
"""

from __future__ import annotations

from dataclasses import dataclass, field
from itertools import combinations, islice, product
from typing import Callable, Iterable, Iterator

import numpy as np

from .core import DIGRAPH, Signature, Structure, hom_exists
from .templates import ARC_STRUCTURE_SIG

__all__ = [
    "enumerate_structures",
    "count_structures",
    "AdjunctionReport",
    "check_adjunction",
    "DualityReport",
    "check_duality_pair",
    "fixture_ft_omega_prime",
    "fixture_delta_r",
    "fixture_omega_arcstructure",
    "check_omega_v1_is_dual",
    "PreconditionError",
    "FixtureReport",
    "omega_prime_hint",
    "check_arc_graph_fixture",
    "check_oriented_path_fixture",
    "check_arc_structure_fixture",
    "subsets",
    "fmt_set",
]


def enumerate_structures(signature: Signature, n_max: int, n_min: int = 0) -> Iterator[Structure]:
    """Every labeled structure on ``"1".."n"`` for ``n_min <= n <= n_max``.

    Within one size, bit ``j`` of a counter selects the ``j``-th tuple of
    the concatenated tuple spaces (symbols in signature order, tuples in
    lexicographic order).
    """
    for n in range(n_min, n_max + 1):
        domain = [str(i) for i in range(1, n + 1)]
        spaces = []
        for name, k in signature:
            rows = np.array(list(product(range(n), repeat=k)), dtype=np.int64).reshape(-1, k)
            spaces.append((name, rows))
        total = sum(len(rows) for _, rows in spaces)
        for mask in range(1 << total):
            arrays, offset = {}, 0
            for name, rows in spaces:
                bits = [(mask >> (offset + j)) & 1 for j in range(len(rows))]
                arrays[name] = rows[np.array(bits, dtype=bool)] if len(rows) else rows
                offset += len(rows)
            yield Structure.from_indices(signature, domain, arrays)


def count_structures(signature: Signature, n_max: int) -> int:
    return sum(2 ** sum(n**k for _, k in signature) for n in range(n_max + 1))


@dataclass
class AdjunctionReport:
    ok: bool
    checked: int
    skipped: int = 0
    counterexample: tuple | None = None
    failures: int = 0

    def __bool__(self) -> bool:
        return self.ok


def check_adjunction(left_apply: Callable, right_apply: Callable, a_stream: Iterable[Structure],
                     b_stream: Iterable[Structure], stop_at_first: bool = True,
                     skip: tuple = ()) -> AdjunctionReport:
    """``left(A) -> B`` iff ``A -> right(B)`` for every pair.

    Exceptions listed in ``skip`` (budget errors) raised by ``right_apply``
    skip that ``B`` and are counted.  The counterexample is
    ``(A, B, hom(left(A), B), hom(A, right(B)))``.
    """
    a_list = list(a_stream)
    lefts = [left_apply(a) for a in a_list]
    checked = skipped = failures = 0
    first = None
    for b in b_stream:
        try:
            right = right_apply(b)
        except skip:
            skipped += len(a_list)
            continue
        for a, la in zip(a_list, lefts):
            lhs = hom_exists(la, b)
            rhs = hom_exists(a, right)
            checked += 1
            if lhs != rhs:
                failures += 1
                if first is None:
                    first = (a, b, lhs, rhs)
                if stop_at_first:
                    return AdjunctionReport(False, checked, skipped, first, failures)
    return AdjunctionReport(failures == 0, checked, skipped, first, failures)


@dataclass
class DualityReport:
    ok: bool
    checked: int
    reason: str | None = None
    counterexample: Structure | None = None

    def __bool__(self) -> bool:
        return self.ok


def check_duality_pair(tree: Structure, dual: Structure, a_stream: Iterable[Structure]) -> DualityReport:
    """Exactly one of ``tree -> A`` and ``A -> dual`` for every ``A``."""
    if hom_exists(tree, dual):
        return DualityReport(False, 0, "tree maps to the dual, so the pair cannot be exclusive")
    checked = 0
    for a in a_stream:
        checked += 1
        if hom_exists(tree, a) == hom_exists(a, dual):
            return DualityReport(False, checked, "both or neither hold", a)
    return DualityReport(True, checked)


# --- reference constructions ------------------------------------------------


def subsets(items) -> list[frozenset]:
    items = list(items)
    return [frozenset(c) for r in range(len(items) + 1) for c in combinations(items, r)]


def fmt_set(s, order) -> str:
    return "{" + ",".join(x for x in order if x in s) + "}"


def fixture_ft_omega_prime(h: Structure) -> Structure:
    """Pairs ``(a, A)`` with ``a`` in H and ``A`` a subset of H; an edge
    ``(a, A) -> (b, B)`` iff ``b in A`` and ``A x B`` consists of edges."""
    edges = h.relations["E"]
    order = h.domain
    vertices = [(a, s) for a in order for s in subsets(order)]
    name = {v: f"{v[0]}/{fmt_set(v[1], order)}" for v in vertices}
    rel = []
    for (a, sa), (b, sb) in product(vertices, repeat=2):
        if b in sa and all((x, y) in edges for x in sa for y in sb):
            rel.append((name[(a, sa)], name[(b, sb)]))
    return Structure(DIGRAPH, [name[v] for v in vertices], {"E": rel})


def fixture_delta_r(b: Structure) -> Structure:
    """Complete bipartite pairs ``(U-, U+)`` with ``U- x U+`` inside E; an edge
    ``(U-, U+) -> (V-, V+)`` iff ``U+`` meets ``V-``."""
    edges = b.relations["E"]
    order = b.domain
    vertices = [(lo, hi) for lo in subsets(order) for hi in subsets(order)
                if all((x, y) in edges for x in lo for y in hi)]
    name = {v: f"{fmt_set(v[0], order)}/{fmt_set(v[1], order)}" for v in vertices}
    rel = [(name[u], name[v]) for u, v in product(vertices, repeat=2) if u[1] & v[0]]
    return Structure(DIGRAPH, [name[v] for v in vertices], {"E": rel})


def fixture_omega_arcstructure(b: Structure) -> Structure:
    """Pairs ``(U+, U-)`` with ``U- x U+`` in D, ``U- x U-`` in I and
    ``U+ x U+`` in O; an edge ``(U+, U-) -> (V+, V-)`` iff ``U+`` meets ``V-``."""
    if b.signature != ARC_STRUCTURE_SIG:
        raise ValueError("expected a structure over D, I, O")
    d, i, o = (b.relations[s] for s in ("D", "I", "O"))
    order = b.domain
    vertices = []
    for plus in subsets(order):
        for minus in subsets(order):
            if (all((x, y) in d for x in minus for y in plus)
                    and all((x, y) in i for x in minus for y in minus)
                    and all((x, y) in o for x in plus for y in plus)):
                vertices.append((plus, minus))
    name = {v: f"{fmt_set(v[0], order)}/{fmt_set(v[1], order)}" for v in vertices}
    rel = [(name[u], name[v]) for u, v in product(vertices, repeat=2) if u[0] & v[1]]
    return Structure(DIGRAPH, [name[v] for v in vertices], {"E": rel})


def omega_prime_hint(result) -> dict[str, str]:
    """Candidate map from ``Omega(H)`` (oriented-path template, its stock
    terms) into :func:`fixture_ft_omega_prime`: ``(a, U) -> (a, {y | (a, y) in U})``.

    Only a starting point for the search, which checks it before use.
    """
    vertex, marked = result.vertex_terms
    order = result.target.domain
    out = {}
    for i, v in enumerate(result.structure.domain):
        (root,) = result.entry(i, vertex)
        a = root["v"]
        heads = {f["v.2"] for f in result.entry(i, marked) if f["v.1"] == a}
        out[v] = f"{a}/{fmt_set(heads, order)}"
    return out


@dataclass
class FixtureReport:
    ok: bool
    checked: int
    counterexample: Structure | None = None

    def __bool__(self) -> bool:
        return self.ok


def _equivalence_sweep(build, fixture, stream, hint=None) -> FixtureReport:
    checked = 0
    for b in stream:
        checked += 1
        result = build(b)
        general = result.structure
        reference = fixture(b)
        forward = hint(result) if hint else None
        if not (hom_exists(general, reference, hint=forward) and hom_exists(reference, general)):
            return FixtureReport(False, checked, b)
    return FixtureReport(True, checked)


def check_arc_graph_fixture(n_max: int, n_min: int = 0) -> FixtureReport:
    """``Omega`` of the arc-graph template against :func:`fixture_delta_r`."""
    from .adjoint import build_omega
    from .templates import arc_graph_template, arc_graph_terms

    tmpl, terms = arc_graph_template(), arc_graph_terms()
    return _equivalence_sweep(lambda b: build_omega(tmpl, b, "edge", terms), fixture_delta_r,
                              enumerate_structures(DIGRAPH, n_max, n_min))


def check_oriented_path_fixture(n_max: int, n_min: int = 0) -> FixtureReport:
    """``Omega`` of the oriented-path template against :func:`fixture_ft_omega_prime`."""
    from .adjoint import build_omega
    from .templates import oriented_path_template, oriented_path_terms

    tmpl, terms = oriented_path_template(), oriented_path_terms()
    return _equivalence_sweep(lambda h: build_omega(tmpl, h, "vertex", terms), fixture_ft_omega_prime,
                              enumerate_structures(DIGRAPH, n_max, n_min), omega_prime_hint)


def check_arc_structure_fixture(n_max: int, n_min: int = 0, limit: int | None = None) -> FixtureReport:
    """``Omega`` of the arc-structure template against
    :func:`fixture_omega_arcstructure`; ``limit`` keeps the first structures
    in enumeration order."""
    from .adjoint import build_omega
    from .templates import arc_structure_template, arc_structure_terms

    tmpl, terms = arc_structure_template(), arc_structure_terms()
    stream = enumerate_structures(ARC_STRUCTURE_SIG, n_max, n_min)
    if limit is not None:
        stream = islice(stream, limit)
    return _equivalence_sweep(lambda b: build_omega(tmpl, b, "edge", terms), fixture_omega_arcstructure, stream)


# --- dual from the adjoint of a one-symbol template -------------------------


class PreconditionError(ValueError):
    pass


@dataclass
class IsomorphismReport:
    ok: bool
    bijection: dict = field(default_factory=dict)
    reason: str | None = None

    def __bool__(self) -> bool:
        return self.ok


def check_omega_v1_is_dual(tmpl, term) -> IsomorphismReport:
    """For a vertex-gadget template with one target symbol and a minimal
    term ``t``, read each vertex of ``Omega`` at the one-element structure as
    the assignment "entry is non-empty" and check that this is an isomorphism
    onto the dual of ``t``."""
    from .adjoint import build_omega, represents
    from .duals import dual_of_term
    from .terms import subterms, tree_of_term

    if len(tmpl.target_sig) != 1 or not tmpl.p_is_vertex:
        raise PreconditionError("needs one target symbol and a single-vertex element gadget")
    (name, _), = tmpl.target_sig.symbols
    q = tmpl.Q[name]
    if not represents(term, q):
        raise PreconditionError("term does not represent the gadget")
    sub = subterms(term)
    for t in sub.all:
        if t != term and hom_exists(q, tree_of_term(t, tmpl.source_sig).structure):
            raise PreconditionError(f"term is not minimal: the gadget maps to T({t})")

    one = Structure(tmpl.target_sig, ["1"])
    omega = build_omega(tmpl, one, "vertex", {name: term})
    dual = dual_of_term(term, tmpl.source_sig)
    order = sub.vertex_terms
    cols = [omega.vertex_terms.index(t) for t in order]
    bijection = {}
    for v, row in zip(omega.structure.domain, omega.masks.tolist()):
        bijection[v] = "".join("1" if row[c] else "0" for c in cols)
    if len(set(bijection.values())) != len(bijection) or set(bijection.values()) != set(dual.domain):
        return IsomorphismReport(False, bijection, "vertex map is not a bijection")
    for sym in tmpl.source_sig.names:
        image = {tuple(bijection[x] for x in t) for t in omega.structure.tuples(sym)}
        if image != dual.relations[sym]:
            return IsomorphismReport(False, bijection, f"{sym}-tuples differ")
    return IsomorphismReport(True, bijection)
