"""Terms for rooted trees.

Three constructors build every rooted tree over a signature::

    vertex                  a single element, rooted at it
    edge_R(t1, ..., tk)     k vertex-rooted trees joined by one new R-tuple
    pr_i(t)                 the tree of an R-term, re-rooted at the i-th entry

Element ids of ``T(t)`` are addresses: ``"v"`` for the root position and
``".i"`` appended for every step into the i-th child of an ``edge`` node.
``pr`` nodes add no step, so ``T(pr_i(s))`` has literally the same domain
as ``T(s)``, and the subtrees of ``edge_R(t1, ..., tk)`` are literal
prefixed copies of ``T(t1), ..., T(tk)``.
"""

from __future__ import annotations

import re
from dataclasses import dataclass
from functools import cached_property

from .core import Signature, Structure

__all__ = [
    "Term",
    "Vertex",
    "Edge",
    "Pr",
    "VERTEX",
    "TermError",
    "TermSyntaxError",
    "RootedTree",
    "SubtermSet",
    "sort_of",
    "tree_of_term",
    "term_of_tree",
    "is_tree",
    "subterms",
    "parse_term",
    "print_term",
    "strip_pr",
    "path_term",
]


class TermError(ValueError):
    pass


class TermSyntaxError(ValueError):
    def __init__(self, message: str, line: int, column: int):
        self.line, self.column = line, column
        super().__init__(f"{line}:{column}: {message}")


class Term:
    def __str__(self) -> str:
        return print_term(self)

    @cached_property
    def size(self) -> int:
        return 1 + sum(c.size for c in self.children)

    @property
    def children(self) -> tuple["Term", ...]:
        return ()

    def sort_key(self) -> tuple[int, str]:
        return (self.size, print_term(self))


@dataclass(frozen=True)
class Vertex(Term):
    def __repr__(self) -> str:
        return "vertex"


@dataclass(frozen=True)
class Edge(Term):
    symbol: str
    args: tuple[Term, ...]

    def __init__(self, symbol: str, args):
        object.__setattr__(self, "symbol", symbol)
        object.__setattr__(self, "args", tuple(args))

    @property
    def children(self):
        return self.args

    def __repr__(self) -> str:
        return print_term(self)


@dataclass(frozen=True)
class Pr(Term):
    index: int
    child: Term

    @property
    def children(self):
        return (self.child,)

    def __repr__(self) -> str:
        return print_term(self)


VERTEX = Vertex()


def sort_of(t: Term, signature: Signature | None = None) -> str:
    """``"V"`` for vertex-rooted terms, the relation symbol for ``edge`` terms."""
    if isinstance(t, Vertex):
        return "V"
    if isinstance(t, Edge):
        if signature is not None and len(t.args) != signature.arity(t.symbol):
            raise TermError(f"edge_{t.symbol} has {len(t.args)} arguments, arity is {signature.arity(t.symbol)}")
        if not t.args:
            raise TermError(f"edge_{t.symbol} needs at least one argument")
        for a in t.args:
            if sort_of(a, signature) != "V":
                raise TermError(f"argument {print_term(a)} of edge_{t.symbol} is not vertex-rooted")
        return t.symbol
    if isinstance(t, Pr):
        if not isinstance(t.child, Edge):
            raise TermError(f"pr_{t.index} applied to a vertex-rooted term")
        sort_of(t.child, signature)
        if not 1 <= t.index <= len(t.child.args):
            raise TermError(f"pr_{t.index} out of range for edge_{t.child.symbol}")
        return "V"
    raise TermError(f"not a term: {t!r}")


def strip_pr(t: Term) -> Term:
    """The term whose tree ``T(t)`` is built on: ``pr`` wrappers removed."""
    while isinstance(t, Pr):
        t = t.child
    return t


def print_term(t: Term) -> str:
    if isinstance(t, Vertex):
        return "vertex"
    if isinstance(t, Edge):
        return f"edge_{t.symbol}(" + ",".join(print_term(a) for a in t.args) + ")"
    if isinstance(t, Pr):
        return f"pr_{t.index}({print_term(t.child)})"
    raise TermError(f"not a term: {t!r}")


_TOKEN = re.compile(r"\s*(?:(vertex\b)|edge_([A-Za-z0-9]+)\s*\(|pr_([0-9]+)\s*\(|(\()|(\))|(,)|(\S))")


def parse_term(text: str, signature: Signature | None = None) -> Term:
    """Parse the concrete term syntax; whitespace is insignificant."""
    tokens = []
    pos = 0
    while pos < len(text):
        m = _TOKEN.match(text, pos)
        if m is None:
            break
        start = m.start(m.lastindex) if m.lastindex else m.end()
        if m.lastindex == 1:
            tokens.append(("vertex", None, start))
        elif m.lastindex == 2:
            tokens.append(("edge", m.group(2), start))
        elif m.lastindex == 3:
            tokens.append(("pr", int(m.group(3)), start))
        elif m.lastindex == 4:
            tokens.append(("(", None, start))
        elif m.lastindex == 5:
            tokens.append((")", None, start))
        elif m.lastindex == 6:
            tokens.append((",", None, start))
        elif m.lastindex == 7:
            raise _syntax(text, start, f"unexpected character {m.group(7)!r}")
        pos = m.end()
    tokens.append(("end", None, len(text)))
    i = 0

    def expect(kind):
        nonlocal i
        tok = tokens[i]
        if tok[0] != kind:
            raise _syntax(text, tok[2], f"expected {kind!r}, found {tok[0]!r}")
        i += 1
        return tok

    def term():
        nonlocal i
        kind, value, at = tokens[i]
        i += 1
        if kind == "vertex":
            return VERTEX
        if kind == "edge":
            args = [term()]
            while tokens[i][0] == ",":
                i += 1
                args.append(term())
            expect(")")
            return Edge(value, args)
        if kind == "pr":
            child = term()
            expect(")")
            if value < 1:
                raise _syntax(text, at, "pr index must be >= 1")
            return Pr(value, child)
        raise _syntax(text, at, f"expected a term, found {kind!r}")

    result = term()
    expect("end")
    try:
        sort_of(result, signature)
    except Exception as exc:
        raise _syntax(text, 0, str(exc)) from None
    return result


def _syntax(text: str, offset: int, message: str) -> TermSyntaxError:
    line = text.count("\n", 0, offset) + 1
    column = offset - (text.rfind("\n", 0, offset) + 1) + 1
    return TermSyntaxError(message, line, column)


# --- trees ------------------------------------------------------------------


@dataclass(frozen=True)
class RootedTree:
    """``T(t)`` with its root and the id of every vertex leaf of the AST.

    ``root`` is an element id for vertex-rooted terms and ``(symbol, tuple)``
    otherwise.  ``address_map`` keys are AST paths: child ``i`` of an edge
    contributes ``i``, the child of a ``pr`` contributes ``0``.
    """

    structure: Structure
    root: object
    address_map: dict

    @property
    def root_is_vertex(self) -> bool:
        return isinstance(self.root, str)


def _child_id(i: int, x: str) -> str:
    return f"v.{i}{x[1:]}"


def _build(t: Term):
    """Return (ordered ids, {symbol: [tuples]}, root, {ast path: id})."""
    if isinstance(t, Vertex):
        return ["v"], {}, "v", {(): "v"}
    if isinstance(t, Pr):
        ids, rels, root, addr = _build(t.child)
        return ids, rels, root[1][t.index - 1], {(0,) + p: x for p, x in addr.items()}
    ids, rels, roots, addr = [], {}, [], {}
    for i, a in enumerate(t.args, 1):
        c_ids, c_rels, c_root, c_addr = _build(a)
        ids.extend(_child_id(i, x) for x in c_ids)
        for name, tuples in c_rels.items():
            rels.setdefault(name, []).extend(tuple(_child_id(i, x) for x in tup) for tup in tuples)
        roots.append(_child_id(i, c_root))
        addr.update({(i,) + p: _child_id(i, x) for p, x in c_addr.items()})
    root = tuple(roots)
    rels.setdefault(t.symbol, []).append(root)
    return ids, rels, (t.symbol, root), addr


def tree_of_term(t: Term, signature: Signature) -> RootedTree:
    sort_of(t, signature)
    ids, rels, root, addr = _build(t)
    for name in rels:
        if name not in signature:
            raise TermError(f"symbol {name!r} not in signature")
    return RootedTree(Structure(signature, ids, rels), root, addr)


def _incidence(a: Structure):
    """Incident (symbol, row-index, position) triples for every element index."""
    incident = [[] for _ in a.domain]
    for name in a.signature.names:
        for r, row in enumerate(a.array(name).tolist()):
            for pos, x in enumerate(row):
                incident[x].append((name, r, pos))
    return incident


def is_tree(a: Structure) -> bool:
    """Incidence multigraph of elements and tuples is connected and acyclic."""
    n_tuples = a.num_tuples()
    n_nodes = len(a.domain) + n_tuples
    n_links = sum(a.array(name).size for name in a.signature.names)
    if n_nodes == 0 or n_links != n_nodes - 1:
        return False
    incident = _incidence(a)
    seen = {0}
    stack = [0]
    seen_tuples = set()
    while stack:
        x = stack.pop()
        for name, r, _ in incident[x]:
            if (name, r) in seen_tuples:
                continue
            seen_tuples.add((name, r))
            for y in a.array(name)[r].tolist():
                if y not in seen:
                    seen.add(y)
                    stack.append(y)
    return len(seen) == len(a.domain) and len(seen_tuples) == n_tuples


def term_of_tree(a: Structure, root) -> tuple[Term, dict[str, str]]:
    """A term for the rooted tree ``(a, root)`` and the bijection ``T(term) -> a``.

    At a vertex with several unused incident tuples the one chosen has the
    earliest symbol in signature order, then the smallest tuple (compared by
    domain positions), then the smallest position holding the vertex.
    """
    if not is_tree(a):
        raise TermError("structure is not a tree")
    incident = _incidence(a)
    used = set()
    arrays = {name: a.array(name).tolist() for name in a.signature.names}
    order = {name: i for i, name in enumerate(a.signature.names)}

    def from_vertex(x: int):
        options = [(order[name], arrays[name][r], pos, name, r)
                   for name, r, pos in incident[x] if (name, r) not in used]
        if not options:
            return VERTEX, {"v": a.domain[x]}
        _, _, pos, name, r = min(options)
        term, ids = from_tuple(name, r)
        return Pr(pos + 1, term), ids

    def from_tuple(name: str, r: int):
        used.add((name, r))
        args, ids = [], {}
        for i, x in enumerate(arrays[name][r], 1):
            term, sub = from_vertex(x)
            args.append(term)
            ids.update({_child_id(i, k): v for k, v in sub.items()})
        return Edge(name, args), ids

    if isinstance(root, str):
        if root not in a.index:
            raise TermError(f"root {root!r} not in structure")
        return from_vertex(a.index[root])
    name, tup = root
    tup = tuple(tup)
    if name not in a.signature or tup not in a.relations[name]:
        raise TermError(f"root tuple {name}{tup} not in structure")
    rows = arrays[name]
    r = rows.index([a.index[x] for x in tup])
    return from_tuple(name, r)


# --- subterms ---------------------------------------------------------------


@dataclass(frozen=True)
class SubtermSet:
    """Distinct subterms, each sort listed by (size, printed form)."""

    all: frozenset
    vertex_terms: tuple[Term, ...]
    by_symbol: dict

    def of_sort(self, symbol: str) -> tuple[Term, ...]:
        return self.by_symbol.get(symbol, ())

    @cached_property
    def edge_terms(self) -> tuple[Term, ...]:
        return tuple(sorted((t for t in self.all if isinstance(t, Edge)), key=Term.sort_key))


def _collect(t: Term, out: set):
    if t in out:
        return
    out.add(t)
    for c in t.children:
        _collect(c, out)


def subterms(*terms: Term) -> SubtermSet:
    """Union of the subterm sets of ``terms``, duplicates collapsed."""
    found = set()
    for t in terms:
        sort_of(t)
        _collect(t, found)
    ordered = sorted(found, key=Term.sort_key)
    by_symbol = {}
    for t in ordered:
        if isinstance(t, Edge):
            by_symbol.setdefault(t.symbol, []).append(t)
    return SubtermSet(
        all=frozenset(found),
        vertex_terms=tuple(t for t in ordered if not isinstance(t, Edge)),
        by_symbol={k: tuple(v) for k, v in by_symbol.items()},
    )


def path_term(k: int, symbol: str = "E") -> Edge:
    """Term of the directed path with ``k`` edges, rooted at its last edge."""
    if k < 1:
        raise ValueError("k must be >= 1")
    s = VERTEX
    t = None
    for _ in range(k):
        t = Edge(symbol, (s, VERTEX))
        s = Pr(2, t)
    return t
