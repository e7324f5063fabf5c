"""Command-line interface: ``pultrkit <command> ...``.

Exit codes: 0 success or the property holds, 1 the property fails, 2 usage
or parse error, 3 budget exceeded, 4 input that parses but is semantically
invalid.  Structures go to stdout in the structure file format, diagnostics
to stderr.
"""

from __future__ import annotations

import argparse
import json
import os
import sys
from pathlib import Path

from . import adjoint, duals, formats, oracle, pultr, templates, terms
from .core import DIGRAPH, Signature, SignatureError, SignatureMismatch, Structure, StructureError, find_hom, hom_equivalent, iter_homs

OK, FAIL, USAGE, BUDGET, INVALID = 0, 1, 2, 3, 4


class _Exit(Exception):
    def __init__(self, code: int, message: str = ""):
        super().__init__(message)
        self.code = code


# --- input helpers ----------------------------------------------------------


def _read(path: str) -> str:
    try:
        return Path(path).read_text(encoding="utf-8")
    except OSError as exc:
        raise _Exit(USAGE, f"cannot read {path}: {exc.strerror}") from None


def _structure(path: str) -> Structure:
    return formats.parse_structure(_read(path))


def _template(arg: str):
    """A template file, or the name of a stock template."""
    if not os.path.exists(arg):
        try:
            return templates.stock_template(arg)
        except ValueError:
            pass
    return formats.parse_template(_read(arg))


def _signature(text: str | None) -> Signature | None:
    if text is None:
        return None
    return formats.parse_signature(text.replace(",", " ").split())


def _terms(args: list[str], signature: Signature | None) -> list[terms.Term]:
    """Each argument is a term file or a literal term."""
    out = []
    for a in args:
        if os.path.exists(a):
            out.extend(formats.parse_terms(_read(a), signature))
        else:
            out.append(terms.parse_term(a, signature))
    if not out:
        raise _Exit(USAGE, "no terms given")
    return out


def _infer_signature(ts) -> Signature:
    """Symbols in order of first appearance, with the arity they are used at."""
    seen: dict[str, int] = {}

    def walk(t):
        if isinstance(t, terms.Edge):
            seen.setdefault(t.symbol, len(t.args))
        for c in t.children:
            walk(c)

    for t in ts:
        walk(t)
    return Signature(tuple(seen.items())) if seen else DIGRAPH


def _emit(structure: Structure):
    sys.stdout.write(formats.print_structure(structure))


def _write_counterexample(out: str, files: dict[str, Structure]) -> list[str]:
    folder = Path(out)
    folder.mkdir(parents=True, exist_ok=True)
    written = []
    for name, s in files.items():
        target = folder / f"{name}.txt"
        target.write_text(formats.print_structure(s), encoding="utf-8")
        written.append(str(target))
    return written


def _fail(out: str, files: dict[str, Structure], message: str) -> int:
    paths = _write_counterexample(out, files)
    print(f"{message}; counterexample written to {', '.join(paths)}", file=sys.stderr)
    return FAIL


# --- commands ---------------------------------------------------------------


def cmd_hom(ns) -> int:
    a, b = _structure(ns.a), _structure(ns.b)
    f = find_hom(a, b)
    if f is None:
        return FAIL
    for x in a.domain:
        print(f"{x} {f[x]}")
    return OK


def cmd_homs(ns) -> int:
    a, b = _structure(ns.a), _structure(ns.b)
    for n, sol in enumerate(iter_homs(a, b)):
        if ns.limit is not None and n >= ns.limit:
            break
        print(" ".join(f"{x}>{b.domain[j]}" for x, j in zip(a.domain, sol)))
    return OK


def cmd_equiv(ns) -> int:
    return OK if hom_equivalent(_structure(ns.a), _structure(ns.b)) else FAIL


def cmd_is_tree(ns) -> int:
    return OK if terms.is_tree(_structure(ns.a)) else FAIL


def cmd_term(ns) -> int:
    a = _structure(ns.a)
    if (ns.root is None) == (ns.root_tuple is None):
        raise _Exit(USAGE, "give exactly one of --root and --root-tuple")
    root: object = ns.root
    if ns.root_tuple is not None:
        symbol, sep, elements = ns.root_tuple.partition(":")
        if not sep:
            raise _Exit(USAGE, "--root-tuple expects SYMBOL:x,y,...")
        root = (symbol, tuple(elements.split(",")))
    if not terms.is_tree(a):
        print("structure is not a tree", file=sys.stderr)
        return FAIL
    t, _ = terms.term_of_tree(a, root)
    print(terms.print_term(t))
    return OK


def cmd_tree(ns) -> int:
    sig = _signature(ns.signature)
    (t,) = _terms([ns.term], sig)
    _emit(terms.tree_of_term(t, sig or _infer_signature([t])).structure)
    return OK


def cmd_lambda(ns) -> int:
    tmpl, _ = _template(ns.template)
    _emit(pultr.lambda_apply(tmpl, _structure(ns.a)))
    return OK


def cmd_gamma(ns) -> int:
    tmpl, _ = _template(ns.template)
    b = _structure(ns.b)
    _emit(adjoint.canonical_gamma(tmpl, b) if ns.canonical else pultr.gamma_apply(tmpl, b))
    return OK


def cmd_dual(ns) -> int:
    sig = _signature(ns.signature)
    ts = _terms(ns.terms, sig)
    _emit(duals.dual_of_forest(ts, sig or _infer_signature(ts), monotone=ns.monotone))
    return OK


def _chosen_terms(ns, tmpl, from_file: dict) -> dict | None:
    chosen = dict(from_file)
    for item in ns.term or []:
        symbol, sep, text = item.partition("=")
        if not sep:
            raise _Exit(USAGE, f"--term expects SYMBOL=TERM, got {item!r}")
        chosen[symbol] = terms.parse_term(text, tmpl.source_sig)
    return chosen or None


def cmd_omega(ns) -> int:
    tmpl, from_file = _template(ns.template)
    b = _structure(ns.b)
    chosen = _chosen_terms(ns, tmpl, from_file)
    if ns.case == "composed":
        _emit(adjoint.omega_composed(tmpl, b, prune_a3=ns.prune_a3, budget=ns.budget))
        return OK
    result = adjoint.build_omega(tmpl, b, ns.case, chosen, prune_a3=ns.prune_a3, budget=ns.budget)
    _emit(result.structure)
    if ns.meta:
        meta = {
            "case": result.case,
            "check_symbol": result.check_symbol,
            "terms": {k: terms.print_term(v) for k, v in result.terms.items()},
            "vertex_terms": [terms.print_term(t) for t in result.vertex_terms],
            "vertices": len(result.structure),
            "tuples": {name: result.structure.num_tuples(name) for name in result.signature.names},
        }
        Path(ns.meta).write_text(json.dumps(meta, indent=2) + "\n", encoding="utf-8")
    return OK


def cmd_verify_adjunction(ns) -> int:
    tmpl, from_file = _template(ns.template)
    chosen = _chosen_terms(ns, tmpl, from_file)
    skip = () if ns.strict_budget else (adjoint.BudgetExceeded,)
    status = OK
    if ns.functor in ("lambda", "both"):
        report = oracle.check_adjunction(
            lambda a: pultr.lambda_apply(tmpl, a), lambda b: pultr.gamma_apply(tmpl, b),
            oracle.enumerate_structures(tmpl.target_sig, ns.a_max),
            oracle.enumerate_structures(tmpl.source_sig, ns.b_max))
        print(f"lambda-gamma: {'ok' if report else 'FAIL'} ({report.checked} pairs)", file=sys.stderr)
        if not report:
            a, b, _, _ = report.counterexample
            status = _fail(ns.out, {"A": a, "B": b}, "hom(Lambda(A),B) and hom(A,Gamma(B)) disagree")
    if ns.functor in ("omega", "both") and status == OK:
        report = oracle.check_adjunction(
            lambda a: pultr.gamma_apply(tmpl, a),
            lambda b: adjoint.omega_apply(tmpl, b, chosen, budget=ns.budget),
            oracle.enumerate_structures(tmpl.source_sig, ns.a_max),
            oracle.enumerate_structures(tmpl.target_sig, ns.b_max), skip=skip)
        print(f"gamma-omega: {'ok' if report else 'FAIL'} ({report.checked} pairs, {report.skipped} skipped)",
              file=sys.stderr)
        if not report:
            a, b, _, _ = report.counterexample
            status = _fail(ns.out, {"A": a, "B": b}, "hom(Gamma(A),B) and hom(A,Omega(B)) disagree")
        elif report.skipped:
            status = BUDGET
    return status


def cmd_verify_duality(ns) -> int:
    sig = _signature(ns.signature)
    (t,) = _terms([ns.term], sig)
    sig = sig or _infer_signature([t])
    tree = terms.tree_of_term(t, sig).structure
    dual = duals.dual_of_term(t, sig)
    report = oracle.check_duality_pair(tree, dual, oracle.enumerate_structures(sig, ns.a_max))
    print(f"duality: {'ok' if report else 'FAIL'} ({report.checked} structures)", file=sys.stderr)
    if report:
        return OK
    files = {"tree": tree, "dual": dual}
    if report.counterexample is not None:
        files["A"] = report.counterexample
    return _fail(ns.out, files, report.reason)


def cmd_verify_fixtures(ns) -> int:
    checks = [
        ("arc-graph", lambda: oracle.check_arc_graph_fixture(ns.max_size)),
        ("oriented-path", lambda: oracle.check_oriented_path_fixture(ns.max_size)),
        ("arc-structure", lambda: oracle.check_arc_structure_fixture(min(ns.max_size, 2))),
    ]
    status = OK
    for name, run in checks:
        report = run()
        print(f"{name}: {'ok' if report else 'FAIL'} ({report.checked} structures)", file=sys.stderr)
        if not report and status == OK:
            status = _fail(ns.out, {f"{name}-B": report.counterexample}, f"{name} differs from its reference")
    tmpl = templates.path_template(2)
    iso = oracle.check_omega_v1_is_dual(tmpl, terms.path_term(2))
    print(f"path-2 dual: {'ok' if iso else 'FAIL'}", file=sys.stderr)
    if not iso:
        print(iso.reason, file=sys.stderr)
        status = FAIL
    return status


# --- parser -----------------------------------------------------------------


def _parser() -> argparse.ArgumentParser:
    p = argparse.ArgumentParser(prog="pultrkit", description="Pultr functors, tree duals and right adjoints.")
    sub = p.add_subparsers(dest="command", required=True)

    def add(name, func, help_text):
        sp = sub.add_parser(name, help=help_text)
        sp.set_defaults(func=func)
        return sp

    def budget(sp):
        env = os.environ.get("PULTR_BUDGET")
        sp.add_argument("--budget", type=int, default=int(env) if env else None,
                        help="vertex cap for Omega (default: $PULTR_BUDGET or 2^20)")

    sp = add("hom", cmd_hom, "exit 0 and print a homomorphism A -> B if one exists")
    sp.add_argument("a")
    sp.add_argument("b")
    sp = add("homs", cmd_homs, "list homomorphisms A -> B")
    sp.add_argument("a")
    sp.add_argument("b")
    sp.add_argument("--limit", type=int)
    sp = add("equiv", cmd_equiv, "exit 0 if A and B are homomorphically equivalent")
    sp.add_argument("a")
    sp.add_argument("b")
    sp = add("is-tree", cmd_is_tree, "exit 0 if A is a tree")
    sp.add_argument("a")
    sp = add("term", cmd_term, "term of a rooted tree")
    sp.add_argument("a")
    sp.add_argument("--root", help="root element id")
    sp.add_argument("--root-tuple", help="root tuple as SYMBOL:x,y,...")
    sp = add("tree", cmd_tree, "tree of a term")
    sp.add_argument("term", help="term file or literal term")
    sp.add_argument("--signature", help="e.g. 'E:2 F:3'; inferred from the term if omitted")
    sp = add("lambda", cmd_lambda, "apply the left functor")
    sp.add_argument("template")
    sp.add_argument("a")
    sp = add("gamma", cmd_gamma, "apply the central functor")
    sp.add_argument("template")
    sp.add_argument("b")
    sp.add_argument("--canonical", action="store_true", help="name elements by image tuples")
    sp = add("dual", cmd_dual, "dual of one or more trees given as terms")
    sp.add_argument("terms", nargs="+")
    sp.add_argument("--signature")
    sp.add_argument("--monotone", action="store_true")
    sp = add("omega", cmd_omega, "apply the right adjoint")
    sp.add_argument("template")
    sp.add_argument("b")
    sp.add_argument("--case", choices=["vertex", "edge", "composed"])
    sp.add_argument("--prune-a3", action="store_true")
    sp.add_argument("--term", action="append", metavar="SYMBOL=TERM")
    sp.add_argument("--meta", help="write construction metadata as JSON")
    budget(sp)

    verify = add("verify", None, "exhaustive checks").add_subparsers(dest="check", required=True)
    vp = verify.add_parser("adjunction", help="sweep both adjunctions of a template")
    vp.set_defaults(func=cmd_verify_adjunction)
    vp.add_argument("template")
    vp.add_argument("--a-max", type=int, default=3)
    vp.add_argument("--b-max", type=int, default=2)
    vp.add_argument("--functor", choices=["lambda", "omega", "both"], default="both")
    vp.add_argument("--term", action="append", metavar="SYMBOL=TERM")
    vp.add_argument("--strict-budget", action="store_true", help="stop on the first budget error")
    vp.add_argument("--out", default="counterexample")
    budget(vp)
    vp = verify.add_parser("duality", help="tree/dual duality against all small structures")
    vp.set_defaults(func=cmd_verify_duality)
    vp.add_argument("term")
    vp.add_argument("--a-max", type=int, default=3)
    vp.add_argument("--signature")
    vp.add_argument("--out", default="counterexample")
    vp = verify.add_parser("fixtures", help="general constructions against closed-form references")
    vp.set_defaults(func=cmd_verify_fixtures)
    vp.add_argument("--max-size", type=int, default=2)
    vp.add_argument("--out", default="counterexample")
    return p


def main(argv: list[str] | None = None) -> int:
    parser = _parser()
    try:
        ns = parser.parse_args(argv)
    except SystemExit as exc:
        return USAGE if exc.code else OK
    try:
        return ns.func(ns)
    except _Exit as exc:
        if str(exc):
            print(exc, file=sys.stderr)
        return exc.code
    except terms.TermSyntaxError as exc:
        print(f"parse error: {exc}", file=sys.stderr)
        return USAGE
    except adjoint.BudgetExceeded as exc:
        print(f"budget exceeded: {exc}", file=sys.stderr)
        return BUDGET
    except (SignatureError, SignatureMismatch, StructureError, pultr.TemplateError, terms.TermError,
            formats.FormatError, oracle.PreconditionError) as exc:
        print(f"invalid input: {exc}", file=sys.stderr)
        return INVALID


if __name__ == "__main__":
    sys.exit(main())
