"""Text formats for structures, templates and terms.

Structure file::

    signature E:2 F:3
    domain a b c
    rel E
    a b
    rel F
    a b c

Template file::

    name arc-graph            (optional)
    source E:2
    target E:2
    P
    domain 0 1
    rel E
    0 1
    Q E
    domain 0 1 2
    rel E
    0 1
    1 2
    epsilon E 1
    0 0
    1 1
    epsilon E 2
    0 1
    1 2
    term E edge_E(pr_2(edge_E(vertex,vertex)),vertex)   (optional)

Term file: one term per line.  In every format ``#`` starts a comment and
blank lines are ignored.  The printers emit every symbol of the signature
(tuples sorted by domain position) so that printing a parsed canonical file
reproduces it byte for byte.
"""

from __future__ import annotations

import re

from .core import Signature, SignatureError, Structure
from .pultr import PultrTemplate
from .terms import Term, TermSyntaxError, parse_term, print_term

__all__ = [
    "ParseError",
    "FormatError",
    "parse_signature",
    "print_signature",
    "parse_structure",
    "print_structure",
    "parse_template",
    "print_template",
    "parse_terms",
    "print_terms",
    "KEYWORDS",
]

KEYWORDS = frozenset({"signature", "domain", "rel", "source", "target", "P", "Q", "epsilon", "term", "name"})
_ID = re.compile(r"^[^\s#]+$")


class ParseError(TermSyntaxError):
    pass


class FormatError(ValueError):
    pass


def _lines(text: str):
    """Yield (line number, tokens) of non-blank lines with comments removed."""
    for n, raw in enumerate(text.splitlines(), 1):
        body = raw.split("#", 1)[0]
        tokens = body.split()
        if tokens:
            yield n, tokens


def parse_signature(tokens, line: int = 1) -> Signature:
    symbols = []
    for tok in tokens:
        name, sep, arity = tok.partition(":")
        if not sep or not arity.isdigit():
            raise ParseError(f"expected SYMBOL:ARITY, found {tok!r}", line, 1)
        symbols.append((name, int(arity)))
    try:
        return Signature(tuple(symbols))
    except SignatureError as exc:
        raise ParseError(str(exc), line, 1) from None


def print_signature(sig: Signature) -> str:
    return str(sig)


class _Reader:
    def __init__(self, text: str):
        self.items = list(_lines(text))
        self.pos = 0

    def peek(self):
        return self.items[self.pos] if self.pos < len(self.items) else (None, None)

    def take(self):
        item = self.peek()
        self.pos += 1
        return item

    def expect(self, keyword: str):
        n, tokens = self.take()
        if tokens is None:
            raise ParseError(f"expected {keyword!r}, found end of input", len(self.items) + 1, 1)
        if tokens[0] != keyword:
            raise ParseError(f"expected {keyword!r}, found {tokens[0]!r}", n, 1)
        return n, tokens[1:]


def _read_body(reader: _Reader, sig: Signature) -> Structure:
    """``domain`` line followed by ``rel`` blocks."""
    n, domain = reader.expect("domain")
    relations = {}
    while True:
        line, tokens = reader.peek()
        if tokens is None or tokens[0] != "rel":
            break
        reader.take()
        if len(tokens) != 2:
            raise ParseError("expected 'rel SYMBOL'", line, 1)
        name = tokens[1]
        if name not in sig:
            raise ParseError(f"symbol {name!r} not in signature", line, 5)
        if name in relations:
            raise ParseError(f"duplicate block for {name!r}", line, 1)
        k = sig.arity(name)
        rows = []
        while True:
            line, tokens = reader.peek()
            if tokens is None or tokens[0] in KEYWORDS:
                break
            reader.take()
            if len(tokens) != k:
                raise ParseError(f"{name} tuple has {len(tokens)} entries, arity is {k}", line, 1)
            rows.append(tuple(tokens))
        relations[name] = rows
    return Structure(sig, domain, relations)


def _write_body(s: Structure, out: list[str]):
    for x in s.domain:
        if not _ID.match(x) or x in KEYWORDS:
            raise FormatError(f"element id {x!r} cannot be written")
    out.append(" ".join(["domain", *s.domain]))
    for name in s.signature.names:
        out.append(f"rel {name}")
        out.extend(" ".join(t) for t in s.tuples(name))


def parse_structure(text: str) -> Structure:
    reader = _Reader(text)
    n, tokens = reader.expect("signature")
    sig = parse_signature(tokens, n)
    s = _read_body(reader, sig)
    line, rest = reader.peek()
    if rest is not None:
        raise ParseError(f"unexpected {rest[0]!r}", line, 1)
    return s


def print_structure(s: Structure) -> str:
    out = [" ".join(["signature", *(f"{n}:{k}" for n, k in s.signature)])]
    _write_body(s, out)
    return "\n".join(out) + "\n"


def parse_template(text: str) -> tuple[PultrTemplate, dict[str, Term]]:
    """The template and any ``term`` lines, keyed by target symbol."""
    reader = _Reader(text)
    name = ""
    line, tokens = reader.peek()
    if tokens is not None and tokens[0] == "name":
        reader.take()
        name = " ".join(tokens[1:])
    n, tokens = reader.expect("source")
    source = parse_signature(tokens, n)
    n, tokens = reader.expect("target")
    target = parse_signature(tokens, n)
    reader.expect("P")
    p = _read_body(reader, source)
    q, eps, terms = {}, {}, {}
    while True:
        line, tokens = reader.take()
        if tokens is None:
            break
        head = tokens[0]
        if head == "Q" and len(tokens) == 2:
            q[tokens[1]] = _read_body(reader, source)
        elif head == "epsilon" and len(tokens) == 3 and tokens[2].isdigit():
            mapping = {}
            while True:
                at, row = reader.peek()
                if row is None or row[0] in KEYWORDS:
                    break
                reader.take()
                if len(row) != 2:
                    raise ParseError("epsilon lines are 'p q'", at, 1)
                mapping[row[0]] = row[1]
            eps[(tokens[1], int(tokens[2]))] = mapping
        elif head == "term" and len(tokens) >= 3:
            try:
                terms[tokens[1]] = parse_term(" ".join(tokens[2:]), source)
            except TermSyntaxError as exc:
                raise ParseError(str(exc), line, 1) from None
        else:
            raise ParseError(f"unexpected {head!r}", line, 1)
    return PultrTemplate(source, target, p, q, eps, name=name), terms


def print_template(tmpl: PultrTemplate, terms: dict[str, Term] | None = None) -> str:
    out = []
    if tmpl.name:
        out.append(f"name {tmpl.name}")
    out.append(" ".join(["source", *(f"{n}:{k}" for n, k in tmpl.source_sig)]))
    out.append(" ".join(["target", *(f"{n}:{k}" for n, k in tmpl.target_sig)]))
    out.append("P")
    _write_body(tmpl.P, out)
    for name, k in tmpl.target_sig:
        out.append(f"Q {name}")
        _write_body(tmpl.Q[name], out)
        for i in range(1, k + 1):
            out.append(f"epsilon {name} {i}")
            eps = tmpl.epsilon[(name, i)]
            out.extend(f"{p} {eps[p]}" for p in tmpl.P.domain)
    for name in tmpl.target_sig.names:
        if terms and name in terms:
            out.append(f"term {name} {print_term(terms[name])}")
    return "\n".join(out) + "\n"


def parse_terms(text: str, signature: Signature | None = None) -> list[Term]:
    out = []
    for n, tokens in _lines(text):
        try:
            out.append(parse_term(" ".join(tokens), signature))
        except TermSyntaxError as exc:
            raise ParseError(exc.args[0].split(": ", 1)[-1], n, exc.column) from None
    return out


def print_terms(terms) -> str:
    return "".join(print_term(t) + "\n" for t in terms)
