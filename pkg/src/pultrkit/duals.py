"""Duals of trees, built from terms.

A vertex of the dual is a truth assignment to the vertex-rooted subterms
with ``vertex`` set to true.  Its id is the bit-string of that assignment
in the order of :func:`pultrkit.terms.subterms` (by size, then printed
form), so ``vertex`` is always the leading ``1``.
"""

from __future__ import annotations

from itertools import product
from typing import Mapping, Sequence

from .core import Signature, Structure, hom_exists
from .terms import VERTEX, Edge, Pr, Term, TermError, sort_of, subterms, tree_of_term

__all__ = ["conj", "dual_of_term", "dual_of_forest", "assignment"]


def conj(t: Edge, vertices: Sequence[Mapping[Term, bool]]) -> bool:
    """``v1[t1] and ... and vk[tk]`` for ``t = edge_R(t1, ..., tk)``."""
    if not isinstance(t, Edge):
        raise TermError("conj needs an edge-rooted term")
    if len(vertices) != len(t.args):
        raise TermError("one assignment per argument is required")
    for arg, v in zip(t.args, vertices):
        if arg not in v:
            raise TermError(f"subterm {arg} not in the index set")
    return all(v[arg] for arg, v in zip(t.args, vertices))


def assignment(vertex_id: str, order: Sequence[Term]) -> dict[Term, bool]:
    return {t: bit == "1" for t, bit in zip(order, vertex_id)}


def dual_of_term(t: Term, signature: Signature, monotone: bool = False) -> Structure:
    return dual_of_forest([t], signature, monotone)


def dual_of_forest(terms: Sequence[Term], signature: Signature, monotone: bool = False) -> Structure:
    """Dual of the trees of ``terms``: a structure ``D`` with ``A -> D`` exactly
    when no ``T(t_i)`` maps to ``A``.

    ``monotone`` keeps only assignments with ``u_t => u_s`` whenever a
    root-preserving homomorphism ``T(s) -> T(t)`` exists.
    """
    if not terms:
        raise TermError("at least one term is required")
    roots = []
    for t in terms:
        if sort_of(t, signature) == "V":
            raise TermError(f"{t} is vertex-rooted; duals are built from edge-rooted terms")
        roots.append(t)
    sub = subterms(*roots)
    order = sub.vertex_terms
    assert order[0] == VERTEX
    ids = ["1" + "".join(bits) for bits in product("01", repeat=len(order) - 1)]
    if monotone:
        ids = [x for x in ids if _monotone(assignment(x, order), order, signature)]
    values = {x: assignment(x, order) for x in ids}
    relations = {}
    root_set = set(roots)
    for name, k in signature:
        rules = sub.of_sort(name)
        tuples = []
        for tup in product(ids, repeat=k):
            vs = [values[x] for x in tup]
            if _allowed(rules, vs, root_set, order):
                tuples.append(tup)
        relations[name] = tuples
    return Structure(signature, ids, relations)


def _allowed(rules, vs, roots, order) -> bool:
    for t in rules:
        holds = conj(t, vs)
        if not holds:
            continue
        if t in roots:
            return False
        for i, v in enumerate(vs, 1):
            p = Pr(i, t)
            if p in v and not v[p]:
                return False
    return True


def _monotone(u: dict, order, signature) -> bool:
    trees = {t: tree_of_term(t, signature) for t in order}
    for s in order:
        for t in order:
            if u[t] and not u[s]:
                ts, tt = trees[s], trees[t]
                if hom_exists(ts.structure, tt.structure, {ts.root: tt.root}):
                    return False
    return True
