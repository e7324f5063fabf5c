"""Stock Pultr templates together with the terms used to represent their gadgets."""

from __future__ import annotations

from .core import DIGRAPH, Signature, Structure
from .pultr import PultrTemplate
from .terms import Edge, Pr, VERTEX, path_term, tree_of_term

ARC_STRUCTURE_SIG = Signature((("D", 2), ("I", 2), ("O", 2)))

_S1 = Pr(1, Edge("E", (VERTEX, VERTEX)))
_S2 = Pr(2, Edge("E", (VERTEX, VERTEX)))


def arc_graph_template() -> PultrTemplate:
    """Vertices are edges of the input; consecutive edges become adjacent."""
    p = Structure(DIGRAPH, ["0", "1"], {"E": [("0", "1")]})
    q = Structure(DIGRAPH, ["0", "1", "2"], {"E": [("0", "1"), ("1", "2")]})
    return PultrTemplate(
        DIGRAPH, DIGRAPH, p, {"E": q},
        {("E", 1): {"0": "0", "1": "1"}, ("E", 2): {"0": "1", "1": "2"}},
        name="arc-graph",
    )


def arc_graph_terms() -> dict:
    return {"E": Edge("E", (_S2, VERTEX))}


def oriented_path_template() -> PultrTemplate:
    """``x1 <- a -> b -> x2`` defines the edges; the single vertex is the element gadget."""
    p = Structure(DIGRAPH, ["0"])
    q = Structure(DIGRAPH, ["0", "1", "2", "3"], {"E": [("1", "0"), ("1", "2"), ("2", "3")]})
    return PultrTemplate(
        DIGRAPH, DIGRAPH, p, {"E": q},
        {("E", 1): {"0": "0"}, ("E", 2): {"0": "3"}},
        name="oriented-path",
    )


def oriented_path_terms() -> dict:
    return {"E": Edge("E", (_S1, _S1))}


def oriented_path_quaternary_template() -> PultrTemplate:
    """The oriented-path gadget read as one 4-ary relation through its four vertices."""
    q = oriented_path_template().Q["E"]
    sig = Signature((("R", 4),))
    eps = {("R", i): {"0": str(i - 1)} for i in range(1, 5)}
    return PultrTemplate(DIGRAPH, sig, Structure(DIGRAPH, ["0"]), {"R": q}, eps, name="oriented-path-4")


def oriented_path_quaternary_terms() -> dict:
    return {"R": Edge("E", (_S1, _S1))}


def arc_structure_template() -> PultrTemplate:
    """Edges of a digraph related by D (consecutive), I (same head), O (same tail)."""
    p = Structure(DIGRAPH, ["0", "1"], {"E": [("0", "1")]})
    dom = ["0", "1", "2"]
    q_d = Structure(DIGRAPH, dom, {"E": [("0", "1"), ("1", "2")]})
    q_i = Structure(DIGRAPH, dom, {"E": [("0", "1"), ("2", "1")]})
    q_o = Structure(DIGRAPH, dom, {"E": [("1", "0"), ("1", "2")]})
    eps = {
        ("D", 1): {"0": "0", "1": "1"}, ("D", 2): {"0": "1", "1": "2"},
        ("I", 1): {"0": "0", "1": "1"}, ("I", 2): {"0": "2", "1": "1"},
        ("O", 1): {"0": "1", "1": "0"}, ("O", 2): {"0": "1", "1": "2"},
    }
    return PultrTemplate(DIGRAPH, ARC_STRUCTURE_SIG, p, {"D": q_d, "I": q_i, "O": q_o}, eps,
                         name="arc-structure")


def arc_structure_terms() -> dict:
    return {
        "D": Edge("E", (_S2, VERTEX)),
        "I": Edge("E", (VERTEX, _S2)),
        "O": Edge("E", (_S1, VERTEX)),
    }


def path_template(k: int) -> PultrTemplate:
    """Element gadget a vertex, edge gadget the directed path with ``k`` edges
    attached at its two ends; built from :func:`path_term` so the ids match."""
    tree = tree_of_term(path_term(k), DIGRAPH)
    q = tree.structure
    heads = {t[1] for t in q.tuples("E")}
    tails = {t[0] for t in q.tuples("E")}
    (start,) = [x for x in q.domain if x not in heads]
    (end,) = [x for x in q.domain if x not in tails]
    return PultrTemplate(
        DIGRAPH, DIGRAPH, Structure(DIGRAPH, ["0"]), {"E": q},
        {("E", 1): {"0": start}, ("E", 2): {"0": end}},
        name=f"path-{k}",
    )


def path_terms(k: int) -> dict:
    return {"E": path_term(k)}


def stock_template(name: str) -> tuple[PultrTemplate, dict]:
    """Template and preferred terms by name: ``arc-graph``, ``oriented-path``,
    ``oriented-path-4``, ``arc-structure`` or ``path-<k>``."""
    if name == "arc-graph":
        return arc_graph_template(), arc_graph_terms()
    if name == "oriented-path":
        return oriented_path_template(), oriented_path_terms()
    if name == "oriented-path-4":
        return oriented_path_quaternary_template(), oriented_path_quaternary_terms()
    if name == "arc-structure":
        return arc_structure_template(), arc_structure_terms()
    if name.startswith("path-"):
        k = int(name.split("-", 1)[1])
        return path_template(k), path_terms(k)
    raise ValueError(f"unknown template {name!r}")


def arc_structure_sample_graph() -> Structure:
    """Five-vertex oriented tree whose arc graph loses the in/out incidences."""
    return Structure(DIGRAPH, ["1", "2", "3", "4", "5"],
                     {"E": [("2", "1"), ("3", "1"), ("4", "2"), ("2", "5")]})


__all__ = [
    "ARC_STRUCTURE_SIG",
    "arc_graph_template",
    "arc_graph_terms",
    "oriented_path_template",
    "oriented_path_terms",
    "oriented_path_quaternary_template",
    "oriented_path_quaternary_terms",
    "arc_structure_template",
    "arc_structure_terms",
    "path_template",
    "path_terms",
    "stock_template",
    "arc_structure_sample_graph",
]
