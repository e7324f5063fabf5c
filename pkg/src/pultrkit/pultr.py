"""Pultr templates with their gadget-replacement and pp-construction functors."""

from __future__ import annotations

from dataclasses import dataclass, field
from typing import Mapping

import numpy as np
from scipy.cluster.hierarchy import DisjointSet

from .core import (
    Homomorphism,
    Signature,
    SignatureMismatch,
    Structure,
    is_hom,
    iter_homs,
    project_homs,
)

__all__ = [
    "PultrTemplate",
    "TemplateError",
    "lambda_apply",
    "gamma_apply",
    "gamma_homs",
    "specialize_names",
    "hom_name",
]


class TemplateError(ValueError):
    pass


@dataclass(frozen=True, eq=False)
class PultrTemplate:
    """Gadget ``P`` for elements, ``Q[R]`` for R-tuples, and ``epsilon[(R, i)]``
    mapping ``P`` onto the i-th attachment point of ``Q[R]`` (``i`` from 1).

    ``epsilon`` values are plain dicts from ``P``'s ids to ``Q[R]``'s ids.
    """

    source_sig: Signature
    target_sig: Signature
    P: Structure
    Q: Mapping[str, Structure]
    epsilon: Mapping[tuple[str, int], Mapping[str, str]]
    name: str = field(default="", compare=False)

    def __post_init__(self):
        problems = self.violations()
        if problems:
            raise TemplateError("; ".join(problems))

    def violations(self) -> list[str]:
        out = []
        if self.P.signature != self.source_sig:
            out.append("P is not over the source signature")
        for name, k in self.target_sig:
            q = self.Q.get(name)
            if q is None:
                out.append(f"no Q for symbol {name}")
                continue
            if q.signature != self.source_sig:
                out.append(f"Q[{name}] is not over the source signature")
                continue
            for i in range(1, k + 1):
                eps = self.epsilon.get((name, i))
                if eps is None:
                    out.append(f"missing epsilon {name} {i}")
                elif not is_hom(Homomorphism(self.P, q, eps)):
                    out.append(f"epsilon {name} {i} is not a homomorphism P -> Q[{name}]")
        extra_q = set(self.Q) - set(self.target_sig.names)
        if extra_q:
            out.append(f"Q given for unknown symbols {sorted(extra_q)}")
        for name, i in self.epsilon:
            if name not in self.target_sig or not 1 <= i <= self.target_sig.arity(name):
                out.append(f"superfluous epsilon {name} {i}")
        return out

    def eps(self, name: str, i: int) -> Homomorphism:
        return Homomorphism(self.P, self.Q[name], self.epsilon[(name, i)])

    @property
    def p_is_vertex(self) -> bool:
        return len(self.P) == 1 and self.P.num_tuples() == 0

    def p_edge_symbol(self) -> str | None:
        """The symbol ``S`` when ``P`` is a single S-tuple on distinct elements."""
        if self.P.num_tuples() != 1:
            return None
        for name in self.source_sig.names:
            if self.P.num_tuples(name) == 1:
                (t,) = self.P.tuples(name)
                if len(set(t)) == len(t) == len(self.P):
                    return name
        return None


def _check(structure: Structure, signature: Signature, what: str):
    if structure.signature != signature:
        raise SignatureMismatch(f"{what} is over [{structure.signature}], expected [{signature}]")


def lambda_apply(tmpl: PultrTemplate, a: Structure) -> Structure:
    """Replace each element of ``a`` by a copy of ``P`` and each R-tuple by a
    copy of ``Q[R]`` glued along the epsilon maps.

    Each glued class is named after its least origin tag: ``"a:p"`` for
    element ``p`` of the copy of ``P`` at ``a``, ``"R(a1,...,ak):q"`` for
    element ``q`` of the copy of ``Q[R]`` at that tuple.
    """
    _check(a, tmpl.target_sig, "input")
    tags = [("P", x, p) for x in a.domain for p in tmpl.P.domain]
    copies = []
    for name in tmpl.target_sig.names:
        q = tmpl.Q[name]
        for e in a.tuples(name):
            copies.append((name, e))
            tags.extend(("Q", name, e, y) for y in q.domain)
    classes = DisjointSet(tags)
    for name, e in copies:
        for i, x in enumerate(e, 1):
            for p, y in tmpl.epsilon[(name, i)].items():
                classes.merge(("P", x, p), ("Q", name, e, y))

    rep = {}
    for subset in classes.subsets():
        least = min(subset)
        for tag in subset:
            rep[tag] = least
    label = {}
    domain = []
    for tag in tags:
        r = rep[tag]
        if r not in label:
            label[r] = _tag_name(r)
            domain.append(label[r])
    relations = {name: set() for name in tmpl.source_sig.names}
    for x in a.domain:
        for name in tmpl.source_sig.names:
            for t in tmpl.P.tuples(name):
                relations[name].add(tuple(label[rep[("P", x, p)]] for p in t))
    for name, e in copies:
        q = tmpl.Q[name]
        for sym in tmpl.source_sig.names:
            for t in q.tuples(sym):
                relations[sym].add(tuple(label[rep[("Q", name, e, y)]] for y in t))
    return Structure(tmpl.source_sig, domain, relations)


def _tag_name(tag) -> str:
    if tag[0] == "P":
        return f"{tag[1]}:{tag[2]}"
    _, name, e, y = tag
    return f"{name}({','.join(e)}):{y}"


def hom_name(tmpl: PultrTemplate, images: tuple[str, ...]) -> str:
    """Element name of ``Gamma(B)`` for the hom with these images (``P`` domain order)."""
    if tmpl.p_is_vertex:
        return images[0]
    sym = tmpl.p_edge_symbol()
    if sym is not None:
        (t,) = tmpl.P.tuples(sym)
        pos = {p: j for j, p in enumerate(tmpl.P.domain)}
        return "(" + ",".join(images[pos[p]] for p in t) + ")"
    return "(" + ",".join(images) + ")"


def specialize_names(tmpl: PultrTemplate):
    """The naming rule of ``Gamma``: image element, edge tuple, or image tuple."""
    return lambda images: hom_name(tmpl, tuple(images))


def gamma_homs(tmpl: PultrTemplate, b: Structure) -> list[tuple[str, ...]]:
    """``hom(P, B)`` as image tuples in ``P`` domain order, sorted by target positions."""
    _check(b, tmpl.source_sig, "input")
    sols = sorted(iter_homs(tmpl.P, b))
    return [tuple(b.domain[j] for j in s) for s in sols]


def gamma_apply(tmpl: PultrTemplate, b: Structure) -> Structure:
    """The pp-construction: universe ``hom(P, B)``, and ``(h1,...,hk)`` in R
    iff some ``g: Q[R] -> B`` has ``h_i = g . epsilon_i`` for every i.
    """
    homs = gamma_homs(tmpl, b)
    names = [hom_name(tmpl, h) for h in homs]
    index = {h: j for j, h in enumerate(homs)}
    p_dom = tmpl.P.domain
    arrays = {}
    for name, k in tmpl.target_sig:
        eps = [tmpl.epsilon[(name, i)] for i in range(1, k + 1)]
        keys = sorted({e[p] for e in eps for p in p_dom}, key=tmpl.Q[name].index.__getitem__)
        rows = []
        for restriction in project_homs(tmpl.Q[name], b, keys):
            g = dict(zip(keys, restriction))
            rows.append([index[tuple(g[e[p]] for p in p_dom)] for e in eps])
        arrays[name] = np.array(rows, dtype=np.int64).reshape(-1, k)
    return Structure.from_indices(tmpl.target_sig, names, arrays)
