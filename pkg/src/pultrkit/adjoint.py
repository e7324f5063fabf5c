"""Right adjoints to central Pultr functors whose gadgets are trees.

Two base cases are built directly: the element gadget ``P`` is a single
vertex (*vertex case*), or a single tuple of some source symbol on distinct
elements (*edge case*, that symbol is the *check symbol*).  Templates that
satisfy the decomposition conditions are handled by splitting them into one
template of each kind and composing the two adjoints.

A vertex of ``Omega(B)`` assigns to each vertex-rooted subterm ``t`` of the
chosen terms a set ``U_t`` of homomorphisms ``Gamma(T(t)) -> B``, with
``U_vertex`` a singleton.  Internally each ``U_t`` is a bitmask over the
sorted list ``hom(Gamma(T(t)), B)``.
"""

from __future__ import annotations

import os
from dataclasses import dataclass, field
from itertools import product

import numpy as np

from .core import (
    Homomorphism,
    Signature,
    Structure,
    enumerate_homs,
    hom_exists,
    is_hom,
    iter_homs,
    single_edge,
)
from .pultr import PultrTemplate, TemplateError, gamma_apply, gamma_homs, hom_name, lambda_apply
from .terms import (
    VERTEX,
    Edge,
    Pr,
    Term,
    is_tree,
    print_term,
    sort_of,
    strip_pr,
    subterms,
    term_of_tree,
    tree_of_term,
)

__all__ = [
    "BudgetExceeded",
    "Check",
    "DEFAULT_BUDGET",
    "DEFAULT_TUPLE_BUDGET",
    "OmegaResult",
    "admits_vertex_case",
    "admits_edge_case",
    "admits_decomposition",
    "default_terms",
    "represents",
    "build_omega",
    "omega_vertex_apply",
    "omega_edge_apply",
    "omega_apply",
    "decompose_template",
    "canonical_gamma",
    "omega_composed",
    "hom_into_omega",
    "necessary_condition_check",
    "NecessaryConditionReport",
    "enumerate_edge_terms",
    "core_of",
]

DEFAULT_BUDGET = 2**20
DEFAULT_TUPLE_BUDGET = 2**26
_CHUNK = 1 << 22


class BudgetExceeded(RuntimeError):
    def __init__(self, what: str, needed: int, budget: int):
        self.what, self.needed, self.budget = what, needed, budget
        super().__init__(f"{what}: {needed} exceeds budget {budget}")


def resolve_budget(budget: int | None) -> int:
    if budget is not None:
        return budget
    env = os.environ.get("PULTR_BUDGET")
    return int(env) if env else DEFAULT_BUDGET


@dataclass(frozen=True)
class Check:
    ok: bool
    reason: str | None = None

    def __bool__(self) -> bool:
        return self.ok


# --- preconditions ----------------------------------------------------------


def _trees(tmpl: PultrTemplate) -> Check:
    for name in tmpl.target_sig.names:
        if not is_tree(tmpl.Q[name]):
            return Check(False, f"Q[{name}] is not a tree")
    return Check(True)


def admits_vertex_case(tmpl: PultrTemplate) -> Check:
    if not tmpl.p_is_vertex:
        return Check(False, "P is not a single vertex with empty relations")
    return _trees(tmpl)


def admits_edge_case(tmpl: PultrTemplate) -> Check:
    if tmpl.p_edge_symbol() is None:
        return Check(False, "P is not a single tuple on distinct elements")
    return _trees(tmpl)


def admits_decomposition(tmpl: PultrTemplate) -> Check:
    """P and every Q[R] trees, every epsilon injective, and the epsilon images
    within one Q[R] pairwise sharing at most one element."""
    if not is_tree(tmpl.P):
        return Check(False, "P is not a tree")
    trees = _trees(tmpl)
    if not trees:
        return trees
    for name, k in tmpl.target_sig:
        images = []
        for i in range(1, k + 1):
            eps = tmpl.epsilon[(name, i)]
            image = set(eps.values())
            if len(image) != len(tmpl.P):
                return Check(False, f"epsilon {name} {i} is not injective")
            images.append(image)
        for i in range(k):
            for j in range(i + 1, k):
                if len(images[i] & images[j]) > 1:
                    return Check(False, f"epsilon {name} {i + 1} and {j + 1} share more than one element")
    return Check(True)


# --- terms ------------------------------------------------------------------


def represents(t: Term, q: Structure) -> bool:
    """``T(t)`` is isomorphic to ``q``: equal sizes and an injective,
    tuple-count-preserving homomorphism ``T(t) -> q``."""
    tree = tree_of_term(t, q.signature).structure
    if len(tree) != len(q) or any(tree.num_tuples(n) != q.num_tuples(n) for n in q.signature.names):
        return False
    for sol in iter_homs(tree, q):
        if len(set(sol)) == len(sol):
            return True
    return False


def default_terms(tmpl: PultrTemplate) -> dict[str, Term]:
    """``term_of_tree`` rooted at the first tuple of each gadget (signature
    order, then sorted tuples); ``vertex`` for a gadget without tuples."""
    out = {}
    for name in tmpl.target_sig.names:
        q = tmpl.Q[name]
        root = None
        for sym in q.signature.names:
            tuples = q.tuples(sym)
            if tuples:
                root = (sym, tuples[0])
                break
        if root is None:
            if len(q) != 1:
                raise TemplateError(f"Q[{name}] has no tuples and is not a single element")
            out[name] = VERTEX
        else:
            out[name] = term_of_tree(q, root)[0]
    return out


# --- construction -----------------------------------------------------------


@dataclass
class OmegaResult:
    """``Omega(B)`` together with everything needed to read its vertices."""

    template: PultrTemplate
    target: Structure
    case: str
    check_symbol: str | None
    terms: dict
    vertex_terms: tuple
    gamma_elements: dict = field(repr=False)
    homs: dict = field(repr=False)
    masks: np.ndarray = field(repr=False)
    structure: Structure | None = None
    witness_rows: dict = field(default_factory=dict, repr=False)
    _glue: dict = field(default_factory=dict, repr=False)

    @property
    def signature(self) -> Signature:
        return self.template.source_sig

    def entry(self, v: int, t: Term) -> list[dict]:
        """``U_t`` of vertex ``v`` as maps from ``Gamma(T(t))`` names to ``B`` ids."""
        key = strip_pr(t)
        col = self.vertex_terms.index(t)
        names = [hom_name(self.template, x) for x in self.gamma_elements[key]]
        out = []
        mask = int(self.masks[v, col])
        for j, h in enumerate(self.homs[key]):
            if (mask >> j) & 1:
                out.append({n: self.target.domain[b] for n, b in zip(names, h)})
        return out

    def witness(self, symbol: str, tup) -> str | None:
        """Least witness of a check-symbol tuple, by vertex ids."""
        rows = self.witness_rows.get(symbol)
        if rows is None:
            return None
        pos = [self.structure.index[x] for x in tup]
        arr = self.structure.array(symbol)
        hit = np.flatnonzero((arr == np.array(pos)).all(axis=1))
        if not len(hit):
            return None
        return self.target.domain[rows[hit[0]]]

    def cross(self, t: Edge, vertices, witness: str | None = None) -> list[dict]:
        """Glued maps ``f1 u ... u fk`` (plus the witness at the root tuple) as
        dicts from ``Gamma(T(t))`` names to ``B`` ids."""
        if not isinstance(t, Edge):
            raise TypeError("cross needs an edge-rooted term")
        with_root = self.check_symbol == t.symbol
        if with_root != (witness is not None):
            raise ValueError("a witness is required exactly for check-symbol terms")
        parts = []
        for i, (arg, v) in enumerate(zip(t.args, vertices), 1):
            maps = []
            for f in self.entry(v, arg):
                maps.append({_embed(self.template, i, name): b for name, b in f.items()})
            parts.append(maps)
        out = []
        for combo in product(*parts):
            g = {}
            for f in combo:
                g.update(f)
            if with_root:
                g[_root_name(self.template, t)] = witness
            out.append(g)
        return out

    def check_tuple(self, symbol: str, vertices) -> tuple[bool, str | None]:
        """Evaluate the edge conditions for one tuple straight from the
        definitions, returning the least witness in the edge case."""
        terms = self._terms_of(symbol)
        if self.check_symbol == symbol:
            for e in self.target.domain:
                if all(self._conditions(t, vertices, e) for t in terms):
                    return True, e
            return False, None
        return all(self._conditions(t, vertices, None) for t in terms), None

    def _terms_of(self, symbol):
        return subterms(*self.terms.values()).of_sort(symbol)

    def _conditions(self, t, vertices, e) -> bool:
        glued = self.cross(t, vertices, e)
        gamma_t = _gamma_tree(self.template, t)
        for g in glued:
            if not is_hom(Homomorphism(gamma_t, self.target, g)):
                return False
        for i, v in enumerate(vertices, 1):
            p = Pr(i, t)
            if p in self.vertex_terms:
                allowed = self.entry(v, p)
                if any(g not in allowed for g in glued):
                    return False
        return True


def _embed(tmpl: PultrTemplate, i: int, name: str) -> str:
    """Name in ``Gamma(T(t))`` of an element of ``Gamma(T(t_i))``."""
    shift = lambda x: f"v.{i}{x[1:]}"
    if tmpl.p_is_vertex:
        return shift(name)
    inner = name[1:-1].split(",")
    return "(" + ",".join(shift(x) for x in inner) + ")"


def _root_name(tmpl: PultrTemplate, t: Edge) -> str:
    root = tree_of_term(t, tmpl.source_sig).root[1]
    return "(" + ",".join(root) + ")"


_gamma_cache: dict = {}


def _gamma_tree(tmpl: PultrTemplate, key: Term) -> Structure:
    cache_key = (id(tmpl), key)
    hit = _gamma_cache.get(cache_key)
    if hit is None or hit[0] is not tmpl:
        if len(_gamma_cache) > 4096:
            _gamma_cache.clear()
        tree = tree_of_term(strip_pr(key), tmpl.source_sig).structure
        hit = (tmpl, gamma_apply(tmpl, tree))
        _gamma_cache[cache_key] = hit
    return hit[1]


def _check_terms(tmpl: PultrTemplate, terms: dict):
    for name in tmpl.target_sig.names:
        if name not in terms:
            raise TemplateError(f"no term given for {name}")
        t = terms[name]
        sort_of(t, tmpl.source_sig)
        if not represents(t, tmpl.Q[name]):
            raise TemplateError(f"term {print_term(t)} does not represent Q[{name}]")


def build_omega(tmpl: PultrTemplate, b: Structure, case: str | None = None, terms: dict | None = None,
                prune_a3: bool = False, budget: int | None = None,
                tuple_budget: int = DEFAULT_TUPLE_BUDGET) -> OmegaResult:
    """Materialize ``Omega(B)`` with its metadata.

    ``case`` is ``"vertex"`` or ``"edge"``; by default whichever the
    template admits.  Raises :class:`BudgetExceeded` before allocating more
    than ``budget`` vertices or evaluating more than ``tuple_budget``
    candidate tuples for one symbol.
    """
    if b.signature != tmpl.target_sig:
        raise TemplateError("B is not over the template's target signature")
    if case is None:
        case = "vertex" if tmpl.p_is_vertex else "edge"
    check = admits_vertex_case(tmpl) if case == "vertex" else admits_edge_case(tmpl)
    if case not in ("vertex", "edge"):
        raise ValueError(f"unknown case {case!r}")
    if not check:
        raise TemplateError(f"template does not admit the {case} case: {check.reason}")
    budget = resolve_budget(budget)
    terms = dict(terms) if terms is not None else default_terms(tmpl)
    _check_terms(tmpl, terms)
    check_symbol = tmpl.p_edge_symbol() if case == "edge" else None

    sub = subterms(*terms.values())
    vterms = sub.vertex_terms
    keys = {strip_pr(t) for t in sub.all}
    elements, homs = {}, {}
    for key in sorted(keys, key=Term.sort_key):
        gamma_t = _gamma_tree(tmpl, key)
        elements[key] = gamma_homs(tmpl, tree_of_term(key, tmpl.source_sig).structure)
        homs[key] = sorted(iter_homs(gamma_t, b))

    radices = []
    for t in vterms:
        n = len(homs[strip_pr(t)])
        radices.append(n if t == VERTEX else 1 << n)
    total = int(np.prod([float(r) for r in radices])) if radices else 1
    if total > budget:
        raise BudgetExceeded("Omega vertices", total, budget)
    idx = np.arange(total, dtype=np.int64)
    masks = np.zeros((total, len(vterms)), dtype=np.int64)
    for col in range(len(vterms) - 1, -1, -1):
        r = radices[col]
        digit = idx % r
        idx //= r
        masks[:, col] = (np.int64(1) << digit) if vterms[col] == VERTEX else digit

    result = OmegaResult(tmpl, b, case, check_symbol, terms, vterms, elements, homs, masks)
    if prune_a3:
        result.masks = masks = masks[_a3_filter(result)]
    _build_edges(result, tuple_budget)
    return result


def _members(result: OmegaResult) -> dict:
    out = {}
    for col, t in enumerate(result.vertex_terms):
        n = len(result.homs[strip_pr(t)])
        bits = (result.masks[:, col, None] >> np.arange(n, dtype=np.int64)) & 1
        out[t] = bits.astype(bool)
    return out


def _vertex_names(result: OmegaResult) -> list[str]:
    b = result.target
    per_term = []
    for t in result.vertex_terms:
        key = strip_pr(t)
        names = [hom_name(result.template, x) for x in result.gamma_elements[key]]
        order = sorted(range(len(names)), key=names.__getitem__)
        graphs = ["[" + ",".join(f"{names[p]}>{b.domain[h[p]]}" for p in order) + "]"
                  for h in result.homs[key]]
        per_term.append(graphs)
    cache = [dict() for _ in per_term]
    out = []
    for row in result.masks.tolist():
        parts = []
        for col, mask in enumerate(row):
            s = cache[col].get(mask)
            if s is None:
                graphs = per_term[col]
                s = "{" + ";".join(graphs[j] for j in range(len(graphs)) if (mask >> j) & 1) + "}"
                cache[col][mask] = s
            parts.append(s)
        out.append("|".join(parts))
    return out


def _glue_table(result: OmegaResult, t: Edge) -> np.ndarray:
    """Index in ``hom(Gamma(T(t)), B)`` of every glued map, or -1 when the
    glued map is not a homomorphism.  Axes: one per argument, then the
    witness when ``t`` has the check symbol."""
    cached = result._glue.get(t)
    if cached is not None:
        return cached
    tmpl, b = result.template, result.target
    nb = len(b)
    with_root = result.check_symbol == t.symbol
    k = len(t.args)
    child_keys = [strip_pr(a) for a in t.args]
    child_pos = [{x: j for j, x in enumerate(result.gamma_elements[c])} for c in child_keys]
    child_homs = [np.array(result.homs[c], dtype=np.int64).reshape(len(result.homs[c]), len(result.gamma_elements[c]))
                  for c in child_keys]
    shape = tuple(len(h) for h in child_homs) + ((nb,) if with_root else ())
    elements = result.gamma_elements[t]
    glued = np.zeros(shape + (len(elements),), dtype=np.int64)
    root = tree_of_term(t, tmpl.source_sig).root[1] if with_root else None
    for pos, images in enumerate(elements):
        owner = {x.split(".")[1] for x in images}
        if with_root and _same_tuple(tmpl, images, root):
            view = [1] * len(shape)
            view[-1] = nb
            glued[..., pos] = np.arange(nb).reshape(view)
        elif len(owner) == 1:
            i = int(owner.pop())
            inner = tuple("v" + x[len(f"v.{i}"):] for x in images)
            column = child_homs[i - 1][:, child_pos[i - 1][inner]]
            view = [1] * len(shape)
            view[i - 1] = len(column)
            glued[..., pos] = column.reshape(view)
        else:
            raise TemplateError(f"element {images} of Gamma(T({print_term(t)})) spans several subtrees")
    target = result.homs[t]
    flat = glued.reshape(-1, len(elements))
    if not elements:
        table = np.full(flat.shape[0], 0 if target else -1, dtype=np.int64)
    elif nb ** len(elements) < 2**62:
        weights = nb ** np.arange(len(elements) - 1, -1, -1, dtype=np.int64)
        codes = np.array(target, dtype=np.int64).reshape(-1, len(elements)) @ weights if target else np.zeros(0, np.int64)
        query = flat @ weights
        at = np.searchsorted(codes, query)
        at_clipped = np.minimum(at, max(len(codes) - 1, 0))
        found = (at < len(codes)) & (codes[at_clipped] == query) if len(codes) else np.zeros(len(query), bool)
        table = np.where(found, at, -1)
    else:
        lookup = {h: j for j, h in enumerate(target)}
        table = np.array([lookup.get(tuple(r), -1) for r in flat.tolist()], dtype=np.int64)
    table = table.reshape(shape)
    result._glue[t] = table
    return table


def _same_tuple(tmpl: PultrTemplate, images, root) -> bool:
    sym = tmpl.p_edge_symbol()
    (p_tuple,) = tmpl.P.tuples(sym)
    pos = {p: j for j, p in enumerate(tmpl.P.domain)}
    return tuple(images[pos[p]] for p in p_tuple) == tuple(root)


def _a3_filter(result: OmegaResult) -> np.ndarray:
    """Keep vertices with ``{f . h | f in U_s2} <= U_s1`` for every
    root-preserving ``h: T(s1) -> T(s2)`` between vertex-rooted subterms."""
    tmpl = result.template
    members = _members(result)
    keep = np.ones(len(result.masks), dtype=bool)
    trees = {t: tree_of_term(t, tmpl.source_sig) for t in result.vertex_terms}
    for s1 in result.vertex_terms:
        for s2 in result.vertex_terms:
            t1, t2 = trees[s1], trees[s2]
            k1, k2 = strip_pr(s1), strip_pr(s2)
            pos2 = {x: j for j, x in enumerate(result.gamma_elements[k2])}
            index1 = {h: j for j, h in enumerate(result.homs[k1])}
            for h in enumerate_homs(t1.structure, t2.structure, {t1.root: t2.root}):
                induced = [pos2[tuple(h.mapping[x] for x in images)] for images in result.gamma_elements[k1]]
                onto = np.zeros((len(result.homs[k2]), max(len(result.homs[k1]), 1)), dtype=np.float32)
                for j2, f in enumerate(result.homs[k2]):
                    onto[j2, index1[tuple(f[p] for p in induced)]] = 1
                image = (members[s2].astype(np.float32) @ onto) > 0
                image = image[:, : len(result.homs[k1])]
                keep &= ~(image & ~members[s1]).any(axis=1)
    return keep


def _build_edges(result: OmegaResult, tuple_budget: int):
    tmpl = result.template
    sub = subterms(*result.terms.values())
    members = _members(result)
    n = len(result.masks)
    nb = len(result.target)
    arrays = {}
    for sym, k in tmpl.source_sig:
        if float(n) ** k > tuple_budget:
            raise BudgetExceeded(f"Omega candidate {sym}-tuples", int(float(n) ** k), tuple_budget)
        terms = sub.of_sort(sym)
        with_witness = result.check_symbol == sym
        if k in (1, 2):
            witnesses = range(nb) if with_witness else [None]
            best = np.full((n,) * k, -1, dtype=np.int64)
            for e in witnesses:
                ok = np.ones((n,) * k, dtype=bool)
                for t in terms:
                    table = _glue_table(result, t)
                    g = table[..., e] if e is not None else table
                    ok &= (_unary_ok if k == 1 else _pair_ok)(result, t, g, members)
                best[(best < 0) & ok] = 0 if e is None else e
            rows = np.argwhere(best >= 0)
            arrays[sym] = rows
            if with_witness:
                result.witness_rows[sym] = best[tuple(rows.T)]
        else:
            rows, wit = [], []
            for tup in product(range(n), repeat=k):
                e = _tuple_ok(result, terms, tup, members, nb if with_witness else None)
                if e is not None:
                    rows.append(tup)
                    wit.append(e)
            arrays[sym] = np.array(rows, dtype=np.int64).reshape(-1, k)
            if with_witness:
                result.witness_rows[sym] = np.array(wit, dtype=np.int64)
    # rows are produced in lexicographic order, which from_indices keeps
    result.structure = Structure.from_indices(tmpl.source_sig, _vertex_names(result), arrays)


def _with_sink(m: np.ndarray) -> np.ndarray:
    """Membership matrix with an extra always-false column for index -1."""
    return np.concatenate([m, np.zeros((m.shape[0], 1), dtype=bool)], axis=1)


def _pair_ok(result, t: Edge, g: np.ndarray, members) -> np.ndarray:
    """(A1)+(A2) for all ordered pairs of vertices and one binary term."""
    t1, t2 = t.args
    m1, m2 = members[t1], members[t2]
    f1, f2 = m1.astype(np.float32), m2.astype(np.float32)
    invalid = (g < 0).astype(np.float32)
    ok = ~(((f1 @ invalid) @ f2.T) > 0)
    n = len(m1)
    p1, p2 = Pr(1, t), Pr(2, t)
    if p1 in members:
        mp = _with_sink(members[p1])
        step = max(1, _CHUNK // max(1, g.size))
        for lo in range(0, n, step):
            hi = min(n, lo + step)
            bad = (m1[lo:hi, :, None] & ~mp[lo:hi][:, g]).any(axis=1)
            ok[lo:hi] &= ~((bad.astype(np.float32) @ f2.T) > 0)
    if p2 in members:
        mq = _with_sink(members[p2])
        step = max(1, _CHUNK // max(1, g.size))
        for lo in range(0, n, step):
            hi = min(n, lo + step)
            bad = (m2[lo:hi, None, :] & ~mq[lo:hi][:, g]).any(axis=2)
            ok[:, lo:hi] &= ~((f1 @ bad.astype(np.float32).T) > 0)
    return ok


def _unary_ok(result, t: Edge, g: np.ndarray, members) -> np.ndarray:
    (t1,) = t.args
    m1 = members[t1]
    ok = ~(m1 & (g < 0)[None, :]).any(axis=1)
    p1 = Pr(1, t)
    if p1 in members:
        mp = _with_sink(members[p1])
        ok &= ~(m1 & ~mp[:, g]).any(axis=1)
    return ok


def _tuple_ok(result, terms, tup, members, nb):
    """Least witness (0 without a check symbol) for one tuple, or None."""
    for e in (range(nb) if nb is not None else [None]):
        good = True
        for t in terms:
            table = _glue_table(result, t)
            g = table[..., e] if e is not None else table
            choices = [np.flatnonzero(members[a][u]) for a, u in zip(t.args, tup)]
            for combo in product(*choices):
                idx = g[combo]
                if idx < 0:
                    good = False
                    break
                for i, u in enumerate(tup, 1):
                    p = Pr(i, t)
                    if p in members and not members[p][u, idx]:
                        good = False
                        break
                if not good:
                    break
            if not good:
                break
        if good:
            return 0 if e is None else e
    return None


def omega_vertex_apply(tmpl: PultrTemplate, b: Structure, terms: dict | None = None,
                       prune_a3: bool = False, budget: int | None = None) -> Structure:
    return build_omega(tmpl, b, "vertex", terms, prune_a3, budget).structure


def omega_edge_apply(tmpl: PultrTemplate, b: Structure, terms: dict | None = None,
                     prune_a3: bool = False, budget: int | None = None) -> Structure:
    return build_omega(tmpl, b, "edge", terms, prune_a3, budget).structure


def omega_apply(tmpl: PultrTemplate, b: Structure, terms: dict | None = None,
                prune_a3: bool = False, budget: int | None = None) -> Structure:
    """The base case the template admits, else the composed adjoint."""
    if admits_vertex_case(tmpl):
        return omega_vertex_apply(tmpl, b, terms, prune_a3, budget)
    if admits_edge_case(tmpl):
        return omega_edge_apply(tmpl, b, terms, prune_a3, budget)
    return omega_composed(tmpl, b, prune_a3=prune_a3, budget=budget)


# --- composition ------------------------------------------------------------


def decompose_template(tmpl: PultrTemplate) -> tuple[PultrTemplate, PultrTemplate]:
    """Split into a vertex-case template that adds a fresh symbol marking
    the copies of ``P`` and an edge-case template over that symbol."""
    check = admits_decomposition(tmpl)
    if not check:
        raise TemplateError(f"template cannot be decomposed: {check.reason}")
    sigma, tau = tmpl.source_sig, tmpl.target_sig
    p = tmpl.P
    mark = sigma.fresh_symbol("S")
    upsilon = sigma.extend(mark, len(p))

    vertex = Structure(sigma, ["0"])
    q1, eps1 = {}, {}
    for name, k in sigma:
        q1[name] = single_edge(sigma, name)
        for i in range(1, k + 1):
            eps1[(name, i)] = {"0": str(i)}
    q1[mark] = p
    for i, x in enumerate(p.domain, 1):
        eps1[(mark, i)] = {"0": x}
    first = PultrTemplate(sigma, upsilon, vertex, q1, eps1, name=f"{tmpl.name}/marks")

    p2 = single_edge(upsilon, mark)
    q2, eps2 = {}, {}
    for name, k in tau:
        q = tmpl.Q[name]
        maps = [tmpl.epsilon[(name, i)] for i in range(1, k + 1)]
        covered = {sym: {tuple(e[x] for x in t) for e in maps for t in p.tuples(sym)} for sym in sigma.names}
        rels = {sym: [t for t in q.tuples(sym) if t not in covered[sym]] for sym in sigma.names}
        rels[mark] = [tuple(e[x] for x in p.domain) for e in maps]
        q2[name] = Structure(upsilon, q.domain, rels)
        if not is_tree(q2[name]):
            raise TemplateError(f"rebuilt gadget for {name} is not a tree")
        for i, e in enumerate(maps, 1):
            eps2[(name, i)] = {str(j): e[x] for j, x in enumerate(p.domain, 1)}
    second = PultrTemplate(upsilon, tau, p2, q2, eps2, name=f"{tmpl.name}/glue")
    return first, second


def canonical_gamma(tmpl: PultrTemplate, b: Structure, nested: bool = False) -> Structure:
    """``Gamma(B)`` with every element named by its image tuple ``(b1,...,bp)``
    in ``P`` domain order.

    ``nested=True`` expects ``b`` itself to carry canonical names and drops
    their outer parentheses, so that composing two calls yields flat tuples.
    """
    g = gamma_apply(tmpl, b)
    if nested:
        for x in b.domain:
            if not (x.startswith("(") and x.endswith(")")):
                raise ValueError(f"{x!r} is not a canonical name")
    strip = (lambda x: x[1:-1]) if nested else (lambda x: x)
    names = ["(" + ",".join(strip(x) for x in h) + ")" for h in gamma_homs(tmpl, b)]
    return g.relabel(dict(zip(g.domain, names)))


def omega_composed(tmpl: PultrTemplate, b: Structure, terms: tuple[dict, dict] | None = None,
                   prune_a3: bool = False, budget: int | None = None) -> Structure:
    """``Omega1(Omega2(B))`` for the two halves of :func:`decompose_template`."""
    first, second = decompose_template(tmpl)
    t1, t2 = terms if terms is not None else (None, None)
    middle = omega_edge_apply(second, b, t2, prune_a3, budget)
    return omega_vertex_apply(first, middle, t1, prune_a3, budget)


def hom_into_omega(a: Structure, tmpl: PultrTemplate, b: Structure, method: str = "materialize",
                   terms: dict | None = None, budget: int | None = None) -> bool:
    """Whether ``A -> Omega(B)``; ``method="gamma"`` decides ``Gamma(A) -> B`` instead."""
    if method == "gamma":
        return hom_exists(gamma_apply(tmpl, a), b)
    if method != "materialize":
        raise ValueError(f"unknown method {method!r}")
    return hom_exists(a, omega_apply(tmpl, b, terms, budget=budget))


# --- necessary condition ----------------------------------------------------


def enumerate_edge_terms(signature: Signature, max_edges: int) -> list[Edge]:
    """Every edge-rooted term with at most ``max_edges`` edge nodes."""
    v_terms = {0: [VERTEX]}
    e_terms = {}
    for n in range(1, max_edges + 1):
        found = []
        for name, k in signature:
            for split in _compositions(n - 1, k):
                for args in product(*(v_terms[c] for c in split)):
                    found.append(Edge(name, args))
        e_terms[n] = found
        v_terms[n] = [Pr(i, e) for e in found for i in range(1, len(e.args) + 1)]
    return [t for n in range(1, max_edges + 1) for t in e_terms[n]]


def _compositions(total: int, parts: int):
    if parts == 1:
        yield (total,)
        return
    for first in range(total + 1):
        for rest in _compositions(total - first, parts - 1):
            yield (first,) + rest


def core_of(a: Structure) -> Structure:
    """A core of ``a``: drop elements while ``a`` still maps into the rest."""
    current = a
    changed = True
    while changed:
        changed = False
        for x in current.domain:
            smaller = current.substructure([y for y in current.domain if y != x])
            if hom_exists(current, smaller):
                current = smaller
                changed = True
                break
    return current


@dataclass
class NecessaryConditionReport:
    status: str  # "pass", "fail" or "budget"
    checked: int
    counterexample: Structure | None = None
    image: Structure | None = None

    def __bool__(self) -> bool:
        return self.status == "pass"


def necessary_condition_check(tmpl: PultrTemplate, max_edges: int = 4, max_trees: int = 2000) -> NecessaryConditionReport:
    """Check that the left functor sends every target-signature tree with at
    most ``max_edges`` tuples to a structure equivalent to a tree, via
    its core.  ``status == "budget"`` means more than ``max_trees`` trees
    were needed and nothing was refuted."""
    trees = [Structure(tmpl.target_sig, ["v"])]
    for t in enumerate_edge_terms(tmpl.target_sig, max_edges):
        trees.append(tree_of_term(t, tmpl.target_sig).structure)
    seen = set()
    checked = 0
    for tree in trees:
        if tree in seen:
            continue
        seen.add(tree)
        if checked >= max_trees:
            return NecessaryConditionReport("budget", checked)
        checked += 1
        image = lambda_apply(tmpl, tree)
        core = core_of(image)
        if not is_tree(core):
            return NecessaryConditionReport("fail", checked, tree, image)
    return NecessaryConditionReport("pass", checked)
