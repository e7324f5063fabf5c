"""Finite relational structures and homomorphism search.

A :class:`Structure` keeps its domain as a tuple of string ids and each
relation as a sorted, duplicate-free ``(m, arity)`` array of domain
positions.  The search routines work on those positions; the public
functions translate back to ids.
"""

from __future__ import annotations

from collections import deque
from dataclasses import dataclass
from functools import cached_property
from itertools import product
from typing import Iterable, Iterator, Mapping, Sequence

import numpy as np

__all__ = [
    "Signature",
    "Structure",
    "Homomorphism",
    "SignatureError",
    "SignatureMismatch",
    "StructureError",
    "DIGRAPH",
    "validate",
    "is_hom",
    "edge_action",
    "compose",
    "find_hom",
    "hom_exists",
    "iter_homs",
    "enumerate_homs",
    "project_homs",
    "hom_equivalent",
    "disjoint_union",
    "stock",
    "vertex_structure",
    "single_edge",
    "path",
    "order",
    "loop",
]


class SignatureError(ValueError):
    pass


class SignatureMismatch(ValueError):
    pass


class StructureError(ValueError):
    def __init__(self, violations: Sequence[str]):
        self.violations = list(violations)
        super().__init__("; ".join(self.violations))


@dataclass(frozen=True)
class Signature:
    """Ordered relation symbols with their arities."""

    symbols: tuple[tuple[str, int], ...]

    def __post_init__(self):
        symbols = tuple((str(name), int(arity)) for name, arity in self.symbols)
        object.__setattr__(self, "symbols", symbols)
        seen = set()
        for name, arity in symbols:
            if name == "V":
                raise SignatureError("'V' is reserved and cannot be a relation symbol")
            if not name.isalnum():
                raise SignatureError(f"symbol name {name!r} must be alphanumeric")
            if name in seen:
                raise SignatureError(f"duplicate symbol {name!r}")
            if arity < 1:
                raise SignatureError(f"symbol {name!r} has arity {arity} < 1")
            seen.add(name)

    @classmethod
    def of(cls, **arities: int) -> "Signature":
        return cls(tuple(arities.items()))

    @cached_property
    def _arity(self) -> dict[str, int]:
        return dict(self.symbols)

    @property
    def names(self) -> tuple[str, ...]:
        return tuple(name for name, _ in self.symbols)

    def arity(self, name: str) -> int:
        try:
            return self._arity[name]
        except KeyError:
            raise SignatureError(f"symbol {name!r} not in signature") from None

    def extend(self, name: str, arity: int) -> "Signature":
        return Signature(self.symbols + ((name, arity),))

    def fresh_symbol(self, stem: str = "S") -> str:
        if stem not in self:
            return stem
        n = 1
        while f"{stem}{n}" in self:
            n += 1
        return f"{stem}{n}"

    def __contains__(self, name) -> bool:
        return name in self._arity

    def __iter__(self):
        return iter(self.symbols)

    def __len__(self) -> int:
        return len(self.symbols)

    def __str__(self) -> str:
        return " ".join(f"{name}:{arity}" for name, arity in self.symbols)


DIGRAPH = Signature((("E", 2),))


def validate(signature: Signature, domain: Iterable, relations: Mapping | None = None) -> list[str]:
    """List every violated structure invariant; an empty list means valid."""
    violations = []
    domain = list(domain)
    members = set()
    for x in domain:
        if not isinstance(x, str):
            violations.append(f"element {x!r} is not a string")
        if x in members:
            violations.append(f"duplicate element {x!r}")
        members.add(x)
    for name, tuples in (relations or {}).items():
        if name not in signature:
            violations.append(f"relation {name!r} not in signature")
            continue
        k = signature.arity(name)
        for t in tuples:
            t = tuple(t)
            if len(t) != k:
                violations.append(f"{name}{t}: length {len(t)} != arity {k}")
            missing = [x for x in t if x not in members]
            for x in missing:
                violations.append(f"{name}{t}: {x!r} not in domain")
    return violations


def _as_rows(array: np.ndarray, k: int) -> np.ndarray:
    array = np.asarray(array, dtype=np.int64).reshape(-1, k)
    if len(array) > 1:
        array = np.unique(array, axis=0)
    return array


class Structure:
    """A finite relational structure over a :class:`Signature`.

    ``relations`` maps symbol names to iterables of id tuples; missing
    symbols are empty.  Invalid input raises :class:`StructureError`.
    """

    def __init__(self, signature: Signature, domain: Iterable, relations: Mapping | None = None):
        domain = tuple(str(x) if isinstance(x, int) else x for x in domain)
        relations = {
            name: [tuple(str(x) if isinstance(x, int) else x for x in t) for t in tuples]
            for name, tuples in (relations or {}).items()
        }
        violations = validate(signature, domain, relations)
        if violations:
            raise StructureError(violations)
        index = {x: i for i, x in enumerate(domain)}
        arrays = {}
        for name, k in signature:
            rows = [[index[x] for x in t] for t in relations.get(name, ())]
            arrays[name] = _as_rows(rows, k)
        self._init(signature, domain, arrays)

    def _init(self, signature, domain, arrays):
        self.signature = signature
        self.domain = domain
        self._arrays = arrays
        for a in arrays.values():
            a.setflags(write=False)

    @classmethod
    def from_indices(cls, signature: Signature, domain: Sequence[str], arrays: Mapping) -> "Structure":
        """Build from position arrays without re-validating ids (internal fast path)."""
        self = cls.__new__(cls)
        n = len(domain)
        full = {}
        for name, k in signature:
            rows = _as_rows(arrays.get(name, np.zeros((0, k), dtype=np.int64)), k)
            if len(rows) and (rows.min() < 0 or rows.max() >= n):
                raise StructureError([f"{name}: index out of range"])
            full[name] = rows
        if len(set(domain)) != n:
            raise StructureError(["duplicate element ids"])
        self._init(signature, tuple(domain), full)
        return self

    @cached_property
    def index(self) -> dict[str, int]:
        return {x: i for i, x in enumerate(self.domain)}

    def __len__(self) -> int:
        return len(self.domain)

    def __contains__(self, x) -> bool:
        return x in self.index

    def array(self, name: str) -> np.ndarray:
        """Rows of positions for relation ``name``."""
        self.signature.arity(name)
        return self._arrays[name]

    def tuples(self, name: str) -> list[tuple[str, ...]]:
        dom = self.domain
        return [tuple(dom[i] for i in row) for row in self.array(name).tolist()]

    @cached_property
    def relations(self) -> dict[str, frozenset]:
        return {name: frozenset(self.tuples(name)) for name in self.signature.names}

    def has_tuple(self, name: str, t: Sequence[str]) -> bool:
        return tuple(t) in self.relations[name]

    def num_tuples(self, name: str | None = None) -> int:
        if name is None:
            return sum(len(a) for a in self._arrays.values())
        return len(self.array(name))

    def relabel(self, mapping: Mapping[str, str]) -> "Structure":
        domain = [mapping[x] for x in self.domain]
        return Structure.from_indices(self.signature, domain, self._arrays)

    def reorder(self, domain: Sequence[str]) -> "Structure":
        """Same structure with the domain listed in a different order."""
        if sorted(domain) != sorted(self.domain) or len(set(domain)) != len(domain):
            raise StructureError(["reorder: not a permutation of the domain"])
        perm = np.array([self.index[x] for x in domain], dtype=np.int64)
        inverse = np.empty(len(perm), dtype=np.int64)
        inverse[perm] = np.arange(len(perm))
        arrays = {name: inverse[a] for name, a in self._arrays.items()}
        return Structure.from_indices(self.signature, domain, arrays)

    def substructure(self, elements: Iterable[str]) -> "Structure":
        """Induced substructure on ``elements`` (kept in domain order)."""
        keep = set(elements)
        positions = [i for i, x in enumerate(self.domain) if x in keep]
        new_pos = np.full(len(self.domain), -1, dtype=np.int64)
        new_pos[positions] = np.arange(len(positions))
        arrays = {}
        for name, a in self._arrays.items():
            mapped = new_pos[a]
            arrays[name] = mapped[(mapped >= 0).all(axis=1)] if len(a) else a
        return Structure.from_indices(self.signature, [self.domain[i] for i in positions], arrays)

    def same_up_to_order(self, other: "Structure") -> bool:
        return (
            self.signature == other.signature
            and set(self.domain) == set(other.domain)
            and len(self.domain) == len(other.domain)
            and self.relations == other.relations
        )

    def __eq__(self, other) -> bool:
        if not isinstance(other, Structure):
            return NotImplemented
        if self is other:
            return True
        return (
            self.signature == other.signature
            and self.domain == other.domain
            and all(np.array_equal(self._arrays[n], other._arrays[n]) for n in self.signature.names)
        )

    def __hash__(self) -> int:
        return hash((self.signature, self.domain, tuple(a.tobytes() for a in self._arrays.values())))

    def __repr__(self) -> str:
        rels = ", ".join(f"{name}={len(a)}" for name, a in self._arrays.items())
        return f"<Structure |A|={len(self.domain)} {rels}>"

    @cached_property
    def _target(self) -> "_Target":
        return _Target(self)

    @cached_property
    def _source(self) -> "_Source":
        return _Source(self)


@dataclass(frozen=True, eq=False)
class Homomorphism:
    source: Structure
    target: Structure
    mapping: Mapping[str, str]

    def __call__(self, x: str) -> str:
        return self.mapping[x]

    @property
    def images(self) -> tuple[str, ...]:
        return tuple(self.mapping[x] for x in self.source.domain)

    def __eq__(self, other) -> bool:
        if not isinstance(other, Homomorphism):
            return NotImplemented
        return self.source == other.source and self.target == other.target and self.images == other.images

    def __hash__(self) -> int:
        return hash(self.images)

    def __repr__(self) -> str:
        body = ", ".join(f"{x}->{self.mapping[x]}" for x in self.source.domain)
        return f"Homomorphism({body})"


def _check_similar(a: Structure, b: Structure):
    if a.signature != b.signature:
        raise SignatureMismatch(f"signatures differ: [{a.signature}] vs [{b.signature}]")


def _positions(f: Mapping[str, str], source: Structure, target: Structure) -> np.ndarray | None:
    try:
        return np.array([target.index[f[x]] for x in source.domain], dtype=np.int64)
    except KeyError:
        return None


def _is_hom_positions(phi: np.ndarray, source: Structure, target: Structure) -> bool:
    m = len(target.domain)
    for name, k in source.signature:
        rows = source.array(name)
        if not len(rows):
            continue
        image = phi[rows]
        tgt = target.array(name)
        if not len(tgt):
            return False
        if m ** k < 2**62:
            weights = m ** np.arange(k, dtype=np.int64)
            found = np.isin(image @ weights, tgt @ weights)
            if not found.all():
                return False
        else:
            present = set(map(tuple, tgt.tolist()))
            if any(tuple(r) not in present for r in image.tolist()):
                return False
    return True


def is_hom(f: Homomorphism) -> bool:
    """True iff ``f.mapping`` is total and preserves every relation."""
    _check_similar(f.source, f.target)
    if any(x not in f.mapping for x in f.source.domain):
        return False
    phi = _positions(f.mapping, f.source, f.target)
    if phi is None:
        return False
    return _is_hom_positions(phi, f.source, f.target)


def edge_action(f: Homomorphism, name: str) -> dict[tuple, tuple]:
    """The coordinatewise map ``f^R`` from ``R`` of the source to ``R`` of the target."""
    f.source.signature.arity(name)
    return {t: tuple(f.mapping[x] for x in t) for t in f.source.tuples(name)}


def compose(f: Homomorphism, g: Homomorphism) -> Homomorphism:
    """``f`` after ``g``."""
    if g.target != f.source:
        raise ValueError("homomorphisms are not composable")
    return Homomorphism(g.source, f.target, {x: f.mapping[g.mapping[x]] for x in g.source.domain})


# --- search -----------------------------------------------------------------


def _bits(mask: int) -> Iterator[int]:
    while mask:
        low = mask & -mask
        yield low.bit_length() - 1
        mask ^= low


def _row_masks(matrix: np.ndarray) -> list[int]:
    packed = np.packbits(matrix, axis=1, bitorder="little")
    return [int.from_bytes(row.tobytes(), "little") for row in packed]


def _adjacency_masks(rows: np.ndarray, n: int):
    """Successor and predecessor bitmasks per element, plus the loop mask."""
    if n <= 8192:
        adj = np.zeros((n, n), dtype=bool)
        adj[rows[:, 0], rows[:, 1]] = True
        succ, pred = _row_masks(adj), _row_masks(adj.T)
        diag = sum(1 << int(i) for i in np.flatnonzero(np.diagonal(adj)))
        return succ, pred, diag
    succ, pred, diag = [0] * n, [0] * n, 0
    for a, b in rows.tolist():
        succ[a] |= 1 << b
        pred[b] |= 1 << a
        if a == b:
            diag |= 1 << a
    return succ, pred, diag


class _Target:
    """Per-target lookup tables, built once and cached on the structure."""

    def __init__(self, s: Structure):
        self.size = len(s.domain)
        self.full = (1 << self.size) - 1
        self.rows = {}
        self.member = {}
        self.succ = {}
        self.pred = {}
        self.diag = {}
        self._union = {}
        for name, k in s.signature:
            if k == 1:
                self.member[name] = sum(1 << int(r) for r in np.unique(s.array(name)))
            elif k == 2:
                self.succ[name], self.pred[name], self.diag[name] = _adjacency_masks(s.array(name), self.size)
            else:
                self.rows[name] = [tuple(r) for r in s.array(name).tolist()]

    def union(self, table: list[int], key, mask: int) -> int:
        cached = self._union.get((key, mask))
        if cached is not None:
            return cached
        out = 0
        for b in _bits(mask):
            out |= table[b]
        if len(self._union) > 200_000:
            self._union.clear()
        self._union[(key, mask)] = out
        return out


class _Source:
    """Constraint network of a source structure."""

    def __init__(self, s: Structure):
        self.size = len(s.domain)
        cons = []
        for name, k in s.signature:
            for row in s.array(name).tolist():
                row = tuple(row)
                if k == 1 or len(set(row)) == 1 and k == 2:
                    cons.append(("unary", name, row[0], k))
                elif k == 2:
                    cons.append(("binary", name, row[0], row[1]))
                else:
                    cons.append(("general", name, row, None))
        self.constraints = cons
        watch = [[] for _ in range(self.size)]
        for ci, c in enumerate(cons):
            if c[0] == "general":
                for v in set(c[2]):
                    watch[v].append(ci)
            elif c[0] == "binary":
                watch[c[2]].append(ci)
                watch[c[3]].append(ci)
            else:
                watch[c[2]].append(ci)
        self.watch = watch


def _revise(c, dom: list[int], tgt: _Target) -> list[int] | None:
    """Make one constraint generalized-arc-consistent; return changed vars or None on wipe-out."""
    kind, name, x, y = c
    if kind == "unary":
        allowed = tgt.member[name] if y == 1 else tgt.diag[name]
        new = dom[x] & allowed
        if new == dom[x]:
            return []
        if not new:
            return None
        dom[x] = new
        return [x]
    if kind == "binary":
        changed = []
        nx = dom[x] & tgt.union(tgt.pred[name], (name, 0), dom[y])
        if not nx:
            return None
        if nx != dom[x]:
            dom[x] = nx
            changed.append(x)
        ny = dom[y] & tgt.union(tgt.succ[name], (name, 1), dom[x])
        if not ny:
            return None
        if ny != dom[y]:
            dom[y] = ny
            changed.append(y)
        return changed
    row = x
    k = len(row)
    support = [0] * k
    doms = [dom[v] for v in row]
    for t in tgt.rows[name]:
        ok = True
        seen = {}
        for j in range(k):
            if not (doms[j] >> t[j]) & 1:
                ok = False
                break
            prev = seen.setdefault(row[j], t[j])
            if prev != t[j]:
                ok = False
                break
        if ok:
            for j in range(k):
                support[j] |= 1 << t[j]
    changed = []
    for j, v in enumerate(row):
        new = dom[v] & support[j]
        if not new:
            return None
        if new != dom[v]:
            dom[v] = new
            changed.append(v)
    return changed


def _propagate(dom: list[int], src: _Source, tgt: _Target, start: Iterable[int]) -> bool:
    cons = src.constraints
    queue = deque(start)
    queued = set(queue)
    while queue:
        ci = queue.popleft()
        queued.discard(ci)
        changed = _revise(cons[ci], dom, tgt)
        if changed is None:
            return False
        for v in changed:
            for cj in src.watch[v]:
                if cj not in queued:
                    queued.add(cj)
                    queue.append(cj)
    return True


def _pick(dom: list[int], src: _Source, variables) -> int | None:
    """Unfixed variable with the fewest candidates, most constraints first on ties."""
    best, best_key = None, None
    for v in variables:
        d = dom[v]
        if d & (d - 1):
            key = (d.bit_count(), -len(src.watch[v]))
            if best_key is None or key < best_key:
                best, best_key = v, key
    return best


def _children(dom: list[int], v: int, src: _Source, tgt: _Target):
    for b in _bits(dom[v]):
        child = dom.copy()
        child[v] = 1 << b
        if _propagate(child, src, tgt, src.watch[v]):
            yield child


def _fixings(dom: list[int], src: _Source, tgt: _Target, variables):
    """Depth-first over consistent states in which every one of ``variables`` is fixed."""
    v = _pick(dom, src, variables)
    if v is None:
        yield dom
        return
    stack = [_children(dom, v, src, tgt)]
    while stack:
        child = next(stack[-1], None)
        if child is None:
            stack.pop()
            continue
        v = _pick(child, src, variables)
        if v is None:
            yield child
        else:
            stack.append(_children(child, v, src, tgt))


def _search(dom: list[int], src: _Source, tgt: _Target, keys: Sequence[int] | None):
    """Yield solutions as tuples of target positions.

    With ``keys`` given, yield each distinct projection onto ``keys`` that
    extends to a full solution, exactly once.
    """
    everything = range(src.size)
    if keys is None:
        for leaf in _fixings(dom, src, tgt, everything):
            yield tuple(d.bit_length() - 1 for d in leaf)
        return
    for partial in _fixings(dom, src, tgt, keys):
        for leaf in _fixings(partial, src, tgt, everything):
            yield tuple(d.bit_length() - 1 for d in leaf)
            break


def _solutions(a: Structure, b: Structure, pre: Mapping[str, str] | None = None,
               keys: Sequence[str] | None = None):
    _check_similar(a, b)
    src, tgt = a._source, b._target
    dom = [tgt.full] * src.size
    for x, y in (pre or {}).items():
        if x not in a.index or y not in b.index:
            return
        i = a.index[x]
        dom[i] &= 1 << b.index[y]
        if not dom[i]:
            return
    if src.size and not tgt.size:
        return
    if not _propagate(dom, src, tgt, range(len(src.constraints))):
        return
    key_pos = None if keys is None else [a.index[x] for x in keys]
    for sol in _search(dom, src, tgt, key_pos):
        if key_pos is None:
            yield sol
        else:
            yield tuple(sol[i] for i in key_pos)


def find_hom(a: Structure, b: Structure, pre: Mapping[str, str] | None = None,
             hint: Mapping[str, str] | None = None) -> dict[str, str] | None:
    """Some homomorphism ``a -> b`` extending ``pre``, or None.

    ``hint`` is a candidate map tried before searching; a hint that is not a
    homomorphism (or contradicts ``pre``) is ignored.
    """
    _check_similar(a, b)
    if hint is not None and all(x in hint for x in a.domain):
        if all(hint[x] == y for x, y in (pre or {}).items()):
            phi = _positions(hint, a, b)
            if phi is not None and _is_hom_positions(phi, a, b):
                return {x: hint[x] for x in a.domain}
    for sol in _solutions(a, b, pre):
        return {x: b.domain[j] for x, j in zip(a.domain, sol)}
    return None


def hom_exists(a: Structure, b: Structure, pre: Mapping[str, str] | None = None,
               hint: Mapping[str, str] | None = None) -> bool:
    return find_hom(a, b, pre, hint) is not None


def iter_homs(a: Structure, b: Structure, pre: Mapping[str, str] | None = None) -> Iterator[tuple[int, ...]]:
    """All homomorphisms as tuples of target positions, in source domain order."""
    return _solutions(a, b, pre)


def enumerate_homs(a: Structure, b: Structure, pre: Mapping[str, str] | None = None) -> list[Homomorphism]:
    out = []
    for sol in _solutions(a, b, pre):
        out.append(Homomorphism(a, b, {x: b.domain[j] for x, j in zip(a.domain, sol)}))
    return out


def project_homs(a: Structure, b: Structure, keys: Sequence[str],
                 pre: Mapping[str, str] | None = None) -> set[tuple[str, ...]]:
    """Distinct restrictions to ``keys`` of homomorphisms ``a -> b`` extending ``pre``."""
    return {tuple(b.domain[j] for j in sol) for sol in _solutions(a, b, pre, keys=list(keys))}


def hom_equivalent(a: Structure, b: Structure, hints: tuple | None = None) -> bool:
    """Homomorphisms exist in both directions; ``hints`` is an optional (a->b, b->a) pair."""
    forward, backward = hints if hints is not None else (None, None)
    return hom_exists(a, b, hint=forward) and hom_exists(b, a, hint=backward)


# --- constructions ----------------------------------------------------------


def disjoint_union(structures: Sequence[Structure], signature: Signature | None = None):
    """Coproduct of ``structures`` with ids tagged ``"<index>:<id>"``.

    Returns the union and one injection dict per input.
    """
    if not structures:
        if signature is None:
            signature = Signature(())
        return Structure(signature, []), []
    sig = structures[0].signature
    for s in structures[1:]:
        _check_similar(structures[0], s)
    domain, injections, arrays = [], [], {name: [] for name in sig.names}
    offset = 0
    for i, s in enumerate(structures):
        inj = {x: f"{i}:{x}" for x in s.domain}
        injections.append(inj)
        domain.extend(inj[x] for x in s.domain)
        for name in sig.names:
            arrays[name].append(s.array(name) + offset)
        offset += len(s.domain)
    arrays = {name: np.concatenate(parts) for name, parts in arrays.items()}
    return Structure.from_indices(sig, domain, arrays), injections


def vertex_structure(signature: Signature = DIGRAPH) -> Structure:
    return Structure(signature, ["1"])


def single_edge(signature: Signature, symbol: str) -> Structure:
    k = signature.arity(symbol)
    dom = [str(i) for i in range(1, k + 1)]
    return Structure(signature, dom, {symbol: [tuple(dom)]})


def path(k: int) -> Structure:
    """Directed path with ``k`` edges on ``"0"..."k"``."""
    if k < 1:
        raise ValueError("path length must be >= 1")
    dom = [str(i) for i in range(k + 1)]
    return Structure(DIGRAPH, dom, {"E": [(dom[i], dom[i + 1]) for i in range(k)]})


def order(k: int) -> Structure:
    """Strict linear order on ``"1"..."k"``."""
    if k < 1:
        raise ValueError("order size must be >= 1")
    dom = [str(i) for i in range(1, k + 1)]
    return Structure(DIGRAPH, dom, {"E": [(a, b) for a in dom for b in dom if int(a) < int(b)]})


def loop() -> Structure:
    return Structure(DIGRAPH, ["0"], {"E": [("0", "0")]})


def stock(kind: str, param=None, signature: Signature | None = None) -> Structure:
    """Named small structures: ``V1``, ``S1`` (param = symbol), ``P`` and ``L`` (param = k)."""
    if kind == "V1":
        return vertex_structure(signature or DIGRAPH)
    if kind == "S1":
        return single_edge(signature or DIGRAPH, param)
    if kind == "P":
        return path(int(param))
    if kind == "L":
        return order(int(param))
    if kind == "loop":
        return loop()
    raise ValueError(f"unknown stock structure {kind!r}")


def brute_force_homs(a: Structure, b: Structure) -> Iterator[dict[str, str]]:
    """Every map checked one by one; a search-free reference for tests."""
    for images in product(b.domain, repeat=len(a.domain)):
        f = dict(zip(a.domain, images))
        if all(tuple(f[x] for x in t) in b.relations[name] for name in a.signature.names for t in a.tuples(name)):
            yield f
