"""Finite directed multigraphs, their morphisms, limits/colimits, canonical forms.

Node and arrow ids are opaque strings.  All values are immutable; every
operation returns fresh values, so anything here can be shared freely
between threads.
"""

from __future__ import annotations

import itertools
import json
import os
from dataclasses import dataclass, field
from functools import cached_property
from typing import Iterable, Iterator, Mapping, NamedTuple, Optional


class GraphError(ValueError):
    """Malformed graph data or a non-composable / mismatched operation."""


class SizeGuardError(GraphError):
    """An operation refused to run because its input exceeds the size guard."""


DEFAULT_SIZE_GUARD = 64


def _size_guard() -> int:
    raw = os.environ.get("DCL_SIZE_GUARD")
    if raw is None:
        return DEFAULT_SIZE_GUARD
    try:
        return int(raw)
    except ValueError:
        raise GraphError(f"DCL_SIZE_GUARD is not an integer: {raw!r}")


class Arrow(NamedTuple):
    id: str
    src: str
    tgt: str


@dataclass(frozen=True)
class Graph:
    nodes: frozenset[str]
    arrows: frozenset[Arrow]

    def __post_init__(self) -> None:
        object.__setattr__(self, "nodes", frozenset(self.nodes))
        object.__setattr__(self, "arrows", frozenset(Arrow(*a) for a in self.arrows))
        ids = [a.id for a in self.arrows]
        if len(ids) != len(set(ids)):
            raise GraphError("duplicate arrow ids")
        clash = set(ids) & self.nodes
        if clash:
            raise GraphError(f"ids used both as node and arrow: {sorted(clash)}")
        for a in self.arrows:
            if a.src not in self.nodes or a.tgt not in self.nodes:
                raise GraphError(f"arrow {a.id!r} has endpoint outside the node set")

    @classmethod
    def build(
        cls, nodes: Iterable[str], arrows: Iterable[tuple[str, str, str]] = ()
    ) -> "Graph":
        return cls(frozenset(nodes), frozenset(Arrow(*a) for a in arrows))

    @classmethod
    def empty(cls) -> "Graph":
        return cls(frozenset(), frozenset())

    @cached_property
    def arrow_by_id(self) -> dict[str, Arrow]:
        return {a.id: a for a in self.arrows}

    @cached_property
    def sorted_nodes(self) -> tuple[str, ...]:
        return tuple(sorted(self.nodes))

    @cached_property
    def sorted_arrows(self) -> tuple[Arrow, ...]:
        return tuple(sorted(self.arrows))

    @cached_property
    def arrows_between(self) -> dict[tuple[str, str], tuple[Arrow, ...]]:
        out: dict[tuple[str, str], list[Arrow]] = {}
        for a in self.sorted_arrows:
            out.setdefault((a.src, a.tgt), []).append(a)
        return {k: tuple(v) for k, v in out.items()}

    def src(self, arrow_id: str) -> str:
        return self.arrow_by_id[arrow_id].src

    def tgt(self, arrow_id: str) -> str:
        return self.arrow_by_id[arrow_id].tgt

    def to_json(self) -> dict:
        return {
            "nodes": list(self.sorted_nodes),
            "arrows": [
                {"id": a.id, "src": a.src, "tgt": a.tgt} for a in self.sorted_arrows
            ],
        }

    @classmethod
    def from_json(cls, data: Mapping) -> "Graph":
        try:
            nodes = data["nodes"]
            arrows = [(a["id"], a["src"], a["tgt"]) for a in data["arrows"]]
        except (KeyError, TypeError) as exc:
            raise GraphError(f"malformed graph JSON: {exc}")
        if len(set(nodes)) != len(nodes):
            raise GraphError("duplicate node ids")
        return cls.build(nodes, arrows)

    def __repr__(self) -> str:
        return f"Graph({len(self.nodes)} nodes, {len(self.arrows)} arrows)"


@dataclass(frozen=True)
class GraphMorphism:
    dom: Graph
    cod: Graph
    node_map: Mapping[str, str]
    arrow_map: Mapping[str, str]

    def __post_init__(self) -> None:
        object.__setattr__(self, "node_map", dict(sorted(self.node_map.items())))
        object.__setattr__(self, "arrow_map", dict(sorted(self.arrow_map.items())))
        if set(self.node_map) != self.dom.nodes:
            raise GraphError("node map is not total on the domain nodes")
        if set(self.arrow_map) != set(self.dom.arrow_by_id):
            raise GraphError("arrow map is not total on the domain arrows")
        for n, image in self.node_map.items():
            if image not in self.cod.nodes:
                raise GraphError(f"node {n!r} maps outside the codomain")
        for a in self.dom.arrows:
            image = self.arrow_map[a.id]
            if image not in self.cod.arrow_by_id:
                raise GraphError(f"arrow {a.id!r} maps outside the codomain")
            img = self.cod.arrow_by_id[image]
            if self.node_map[a.src] != img.src or self.node_map[a.tgt] != img.tgt:
                raise GraphError(f"incidence not preserved at arrow {a.id!r}")

    __hash__ = None  # type: ignore[assignment]

    def then(self, other: "GraphMorphism") -> "GraphMorphism":
        return compose(self, other)

    @cached_property
    def is_bijective(self) -> bool:
        return (
            len(self.node_map) == len(self.cod.nodes)
            and len(set(self.node_map.values())) == len(self.cod.nodes)
            and len(self.arrow_map) == len(self.cod.arrows)
            and len(set(self.arrow_map.values())) == len(self.cod.arrows)
        )

    def inverse(self) -> "GraphMorphism":
        if not self.is_bijective:
            raise GraphError("morphism is not an isomorphism")
        return GraphMorphism(
            self.cod,
            self.dom,
            {v: k for k, v in self.node_map.items()},
            {v: k for k, v in self.arrow_map.items()},
        )

    def to_json(self, inline: bool = True) -> dict:
        out: dict = {"nodes": dict(self.node_map), "arrows": dict(self.arrow_map)}
        if inline:
            out["dom"] = self.dom.to_json()
            out["cod"] = self.cod.to_json()
        return out

    @classmethod
    def from_json(
        cls,
        data: Mapping,
        dom: Optional[Graph] = None,
        cod: Optional[Graph] = None,
    ) -> "GraphMorphism":
        try:
            dom = dom if dom is not None else Graph.from_json(data["dom"])
            cod = cod if cod is not None else Graph.from_json(data["cod"])
            return cls(dom, cod, dict(data["nodes"]), dict(data["arrows"]))
        except (KeyError, TypeError) as exc:
            raise GraphError(f"malformed morphism JSON: {exc}")

    def __repr__(self) -> str:
        return f"GraphMorphism({self.dom!r} -> {self.cod!r})"


def identity(graph: Graph) -> GraphMorphism:
    return GraphMorphism(
        graph,
        graph,
        {n: n for n in graph.nodes},
        {a.id: a.id for a in graph.arrows},
    )


def compose(f: GraphMorphism, g: GraphMorphism) -> GraphMorphism:
    if f.cod != g.dom:
        raise GraphError(
            f"cannot compose: codomain {f.cod!r} differs from domain {g.dom!r}"
        )
    return GraphMorphism(
        f.dom,
        g.cod,
        {n: g.node_map[v] for n, v in f.node_map.items()},
        {a: g.arrow_map[v] for a, v in f.arrow_map.items()},
    )


# ---------------------------------------------------------------------------
# Homomorphism search


def iter_homomorphisms(g: Graph, h: Graph) -> Iterator[GraphMorphism]:
    """All incidence-preserving morphisms g -> h.

    Deterministic lexicographic order over sorted node / arrow ids: node
    assignments vary slowest, then arrow assignments in sorted arrow order.
    Plain backtracking with forward-checking on incidence.
    """
    nodes = g.sorted_nodes
    cod_nodes = h.sorted_nodes
    if g.nodes and not h.nodes:
        return

    def assign(i: int, node_map: dict[str, str]) -> Iterator[dict[str, str]]:
        if i == len(nodes):
            yield dict(node_map)
            return
        n = nodes[i]
        for candidate in cod_nodes:
            node_map[n] = candidate
            ok = True
            for a in g.sorted_arrows:
                s = node_map.get(a.src)
                t = node_map.get(a.tgt)
                if s is not None and t is not None and (s, t) not in h.arrows_between:
                    ok = False
                    break
            if ok:
                yield from assign(i + 1, node_map)
            del node_map[n]

    arrow_ids = [a.id for a in g.sorted_arrows]
    for node_map in assign(0, {}):
        candidates = []
        for a in g.sorted_arrows:
            key = (node_map[a.src], node_map[a.tgt])
            candidates.append([x.id for x in h.arrows_between.get(key, ())])
        for images in itertools.product(*candidates):
            yield GraphMorphism(g, h, node_map, dict(zip(arrow_ids, images)))


@dataclass(frozen=True)
class HomSearchResult:
    morphisms: tuple[GraphMorphism, ...]
    truncated: bool

    def __iter__(self) -> Iterator[GraphMorphism]:
        return iter(self.morphisms)

    def __len__(self) -> int:
        return len(self.morphisms)


def enumerate_homomorphisms(
    g: Graph, h: Graph, limit: Optional[int] = None
) -> HomSearchResult:
    found: list[GraphMorphism] = []
    truncated = False
    for m in iter_homomorphisms(g, h):
        if limit is not None and len(found) >= limit:
            truncated = True
            break
        found.append(m)
    return HomSearchResult(tuple(found), truncated)


def find_isomorphism(g: Graph, h: Graph) -> Optional[GraphMorphism]:
    """The lexicographically least isomorphism g -> h, or None."""
    if len(g.nodes) != len(h.nodes) or len(g.arrows) != len(h.arrows):
        return None
    if sorted(_degree_profile(g).values()) != sorted(_degree_profile(h).values()):
        return None
    for m in iter_homomorphisms(g, h):
        if m.is_bijective:
            return m
    return None


def _degree_profile(g: Graph) -> dict[str, tuple[int, int]]:
    out = {n: [0, 0] for n in g.nodes}
    for a in g.arrows:
        out[a.src][0] += 1
        out[a.tgt][1] += 1
    return {n: (d[0], d[1]) for n, d in out.items()}


# ---------------------------------------------------------------------------
# Pullback / pushout


def pair_id(left: str, right: str) -> str:
    return f"({left}|{right})"


def pullback(
    f: GraphMorphism, g: GraphMorphism
) -> tuple[Graph, GraphMorphism, GraphMorphism]:
    """Pullback of a cospan f: A -> C <- B :g.

    Returns (P, p: P -> A, q: P -> B); node/arrow ids of P are rendered
    canonically as "(a|b)".
    """
    if f.cod != g.cod:
        raise GraphError("pullback requires a cospan: codomains differ")
    nodes = []
    node_p: dict[str, str] = {}
    node_q: dict[str, str] = {}
    for a in f.dom.sorted_nodes:
        for b in g.dom.sorted_nodes:
            if f.node_map[a] == g.node_map[b]:
                pid = pair_id(a, b)
                nodes.append(pid)
                node_p[pid] = a
                node_q[pid] = b
    arrows = []
    arrow_p: dict[str, str] = {}
    arrow_q: dict[str, str] = {}
    for x in f.dom.sorted_arrows:
        for y in g.dom.sorted_arrows:
            if f.arrow_map[x.id] == g.arrow_map[y.id]:
                pid = pair_id(x.id, y.id)
                arrows.append((pid, pair_id(x.src, y.src), pair_id(x.tgt, y.tgt)))
                arrow_p[pid] = x.id
                arrow_q[pid] = y.id
    p_graph = Graph.build(nodes, arrows)
    return (
        p_graph,
        GraphMorphism(p_graph, f.dom, node_p, arrow_p),
        GraphMorphism(p_graph, g.dom, node_q, arrow_q),
    )


class _UnionFind:
    def __init__(self) -> None:
        self.parent: dict[str, str] = {}

    def add(self, x: str) -> None:
        self.parent.setdefault(x, x)

    def find(self, x: str) -> str:
        while self.parent[x] != x:
            self.parent[x] = self.parent[self.parent[x]]
            x = self.parent[x]
        return x

    def union(self, x: str, y: str) -> None:
        rx, ry = self.find(x), self.find(y)
        if rx != ry:
            self.parent[max(rx, ry)] = min(rx, ry)

    def classes(self) -> dict[str, list[str]]:
        out: dict[str, list[str]] = {}
        for x in self.parent:
            out.setdefault(self.find(x), []).append(x)
        return out


def pushout(
    f: GraphMorphism, g: GraphMorphism
) -> tuple[Graph, GraphMorphism, GraphMorphism]:
    """Pushout of a span cod(f) <- C -> cod(g).

    Returns (P, into_left: cod(f) -> P, into_right: cod(g) -> P): the
    quotient of the disjoint union of cod(f) and cod(g) by the equivalence
    generated by f(c) ~ g(c), on nodes and arrows separately.
    """
    if f.dom != g.dom:
        raise GraphError("pushout requires a span: domains differ")
    ltag = lambda x: f"L:{x}"
    rtag = lambda x: f"R:{x}"
    uf_nodes = _UnionFind()
    uf_arrows = _UnionFind()
    for n in f.cod.nodes:
        uf_nodes.add(ltag(n))
    for n in g.cod.nodes:
        uf_nodes.add(rtag(n))
    for a in f.cod.arrows:
        uf_arrows.add(ltag(a.id))
    for a in g.cod.arrows:
        uf_arrows.add(rtag(a.id))
    for c in f.dom.nodes:
        uf_nodes.union(ltag(f.node_map[c]), rtag(g.node_map[c]))
    for c in f.dom.arrow_by_id:
        uf_arrows.union(ltag(f.arrow_map[c]), rtag(g.arrow_map[c]))

    def class_id(members: list[str]) -> str:
        return "~".join(sorted(members))

    node_classes = uf_nodes.classes()
    arrow_classes = uf_arrows.classes()
    node_id = {rep: class_id(members) for rep, members in node_classes.items()}
    arrow_id = {rep: class_id(members) for rep, members in arrow_classes.items()}

    def node_class(tagged: str) -> str:
        return node_id[uf_nodes.find(tagged)]

    def arrow_class(tagged: str) -> str:
        return arrow_id[uf_arrows.find(tagged)]

    def endpoints(rep: str) -> tuple[str, str]:
        member = sorted(arrow_classes[rep])[0]
        side, raw = member.split(":", 1)
        graph = f.cod if side == "L" else g.cod
        tag = ltag if side == "L" else rtag
        arrow = graph.arrow_by_id[raw]
        return node_class(tag(arrow.src)), node_class(tag(arrow.tgt))

    arrows = [
        (arrow_id[rep], *endpoints(rep)) for rep in sorted(arrow_classes)
    ]
    p_graph = Graph.build(node_id.values(), arrows)
    into_left = GraphMorphism(
        f.cod,
        p_graph,
        {n: node_class(ltag(n)) for n in f.cod.nodes},
        {a: arrow_class(ltag(a)) for a in f.cod.arrow_by_id},
    )
    into_right = GraphMorphism(
        g.cod,
        p_graph,
        {n: node_class(rtag(n)) for n in g.cod.nodes},
        {a: arrow_class(rtag(a)) for a in g.cod.arrow_by_id},
    )
    return p_graph, into_left, into_right


# ---------------------------------------------------------------------------
# Canonical forms


@dataclass(frozen=True)
class CanonicalForm:
    graph: Graph
    relabeling: GraphMorphism  # isomorphism input -> canonical graph

    @cached_property
    def bytes(self) -> bytes:
        return serialize_graph(self.graph)


def serialize_graph(g: Graph) -> bytes:
    return json.dumps(g.to_json(), sort_keys=True, separators=(",", ":")).encode()


def _refine(
    g: Graph, colors: dict[str, tuple], arrow_labels: Mapping[str, str]
) -> dict[str, tuple]:
    while True:
        signature: dict[str, tuple] = {}
        for n in g.nodes:
            outs = sorted(
                (arrow_labels[a.id], colors[a.tgt]) for a in g.arrows if a.src == n
            )
            ins = sorted(
                (arrow_labels[a.id], colors[a.src]) for a in g.arrows if a.tgt == n
            )
            signature[n] = (colors[n], tuple(outs), tuple(ins))
        ranking = {sig: i for i, sig in enumerate(sorted(set(signature.values())))}
        new = {n: (ranking[signature[n]],) for n in g.nodes}
        if len(set(new.values())) == len(set(colors.values())):
            return new
        colors = new


def _encode(
    g: Graph,
    order: list[str],
    arrow_labels: Mapping[str, str],
    node_colors: Mapping[str, str],
) -> tuple:
    index = {n: i for i, n in enumerate(order)}
    return (
        len(order),
        tuple(node_colors[n] for n in order),
        tuple(
            sorted((index[a.src], index[a.tgt], arrow_labels[a.id]) for a in g.arrows)
        ),
    )


def _interchangeable(g: Graph, members: list[str], labels: Mapping[str, str]) -> bool:
    """True when swapping the first member with any other is an automorphism.

    Then all members are in one automorphism orbit and the search needs
    only one representative; this keeps symmetric graphs (edgeless cells,
    parallel structure) from exploding the branching.
    """
    base = sorted((a.src, a.tgt, labels[a.id]) for a in g.arrows)
    v0 = members[0]
    for w in members[1:]:
        swap = {v0: w, w: v0}
        swapped = sorted(
            (swap.get(a.src, a.src), swap.get(a.tgt, a.tgt), labels[a.id])
            for a in g.arrows
        )
        if swapped != base:
            return False
    return True


def canonicalize(
    g: Graph,
    max_nodes: Optional[int] = None,
    node_colors: Optional[Mapping[str, str]] = None,
    arrow_labels: Optional[Mapping[str, str]] = None,
) -> CanonicalForm:
    """Deterministic canonical form: canonical bytes agree iff graphs are isomorphic.

    Degree-sequence color refinement followed by exhaustive backtracking over
    orderings consistent with the refinement, choosing the lexicographically
    minimal adjacency encoding.  Optional node colors / arrow labels restrict
    the isomorphisms considered (used to canonicalize typed instances); labels
    must be drawn from a shared vocabulary for cross-graph byte comparison.
    """
    guard = max_nodes if max_nodes is not None else _size_guard()
    if len(g.nodes) > guard:
        raise SizeGuardError(
            f"refusing to canonicalize a graph with {len(g.nodes)} nodes "
            f"(guard is {guard}; set DCL_SIZE_GUARD to override)"
        )
    labels = (
        dict(arrow_labels)
        if arrow_labels is not None
        else {a.id: "" for a in g.arrows}
    )
    best: dict = {"encoding": None, "order": None}
    color_of = (
        dict(node_colors) if node_colors is not None else {n: "" for n in g.nodes}
    )
    seed = {n: (color_of[n],) for n in g.nodes}
    initial = _refine(g, seed, labels)

    def search(colors: dict[str, tuple]) -> None:
        cells: dict[tuple, list[str]] = {}
        for n, c in colors.items():
            cells.setdefault(c, []).append(n)
        nonsingleton = sorted(c for c, members in cells.items() if len(members) > 1)
        if not nonsingleton:
            order = sorted(g.nodes, key=lambda n: colors[n])
            enc = _encode(g, order, labels, color_of)
            if best["encoding"] is None or enc < best["encoding"]:
                best["encoding"] = enc
                best["order"] = order
            return
        target = nonsingleton[0]
        members = sorted(cells[target])
        if _interchangeable(g, members, labels):
            members = members[:1]
        for v in members:
            split = {
                n: (c, 0 if n == v else 1) for n, c in colors.items()
            }
            search(_refine(g, split, labels))

    search(initial)
    order: list[str] = best["order"] if best["order"] is not None else []
    index = {n: i for i, n in enumerate(order)}
    node_map = {n: f"n{index[n]}" for n in order}
    arrow_order = sorted(
        g.arrows, key=lambda a: (index[a.src], index[a.tgt], labels[a.id], a.id)
    )
    arrow_map = {a.id: f"e{i}" for i, a in enumerate(arrow_order)}
    canonical = Graph.build(
        node_map.values(),
        [(arrow_map[a.id], node_map[a.src], node_map[a.tgt]) for a in g.arrows],
    )
    return CanonicalForm(canonical, GraphMorphism(g, canonical, node_map, arrow_map))


def canonical_bytes(g: Graph, max_nodes: Optional[int] = None) -> bytes:
    return canonicalize(g, max_nodes).bytes
