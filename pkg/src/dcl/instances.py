"""Typed instances (graphs over a schema carrier), indexed semantics, and deltas.

A typed instance is a graph morphism t: X -> G.  Instance updates are
spans of slice morphisms (deltas) composed by pullback.  Everything is
immutable and pure.
"""

from __future__ import annotations

import itertools
from dataclasses import dataclass
from functools import cached_property
from typing import Iterator, Mapping, Optional

from dcl.graphs import (
    Graph,
    GraphError,
    GraphMorphism,
    canonicalize,
    compose,
    identity,
    pullback,
    serialize_graph,
)


@dataclass(frozen=True)
class TypedInstance:
    typing: GraphMorphism

    @property
    def carrier(self) -> Graph:
        return self.typing.dom

    @property
    def schema(self) -> Graph:
        return self.typing.cod

    @classmethod
    def build(
        cls,
        schema: Graph,
        carrier: Graph,
        node_typing: Mapping[str, str],
        arrow_typing: Mapping[str, str],
    ) -> "TypedInstance":
        return cls(GraphMorphism(carrier, schema, node_typing, arrow_typing))

    @classmethod
    def empty(cls, schema: Graph) -> "TypedInstance":
        return cls(GraphMorphism(Graph.empty(), schema, {}, {}))

    def node_fiber(self, schema_node: str) -> tuple[str, ...]:
        return tuple(
            n for n in self.carrier.sorted_nodes if self.typing.node_map[n] == schema_node
        )

    def arrow_fiber(self, schema_arrow: str) -> tuple[str, ...]:
        return tuple(
            a.id
            for a in self.carrier.sorted_arrows
            if self.typing.arrow_map[a.id] == schema_arrow
        )

    def to_json(self) -> dict:
        return {
            "schema": self.schema.to_json(),
            "carrier": self.carrier.to_json(),
            "typing": {
                "nodes": dict(self.typing.node_map),
                "arrows": dict(self.typing.arrow_map),
            },
        }

    @classmethod
    def from_json(cls, data: Mapping, schema: Optional[Graph] = None) -> "TypedInstance":
        try:
            schema = schema if schema is not None else Graph.from_json(data["schema"])
            carrier = Graph.from_json(data["carrier"])
            typing = data["typing"]
            return cls.build(schema, carrier, typing["nodes"], typing["arrows"])
        except (KeyError, TypeError) as exc:
            raise GraphError(f"malformed instance JSON: {exc}")

    def __repr__(self) -> str:
        return f"TypedInstance({self.carrier!r} over {self.schema!r})"


@dataclass(frozen=True)
class CanonicalInstance:
    instance: TypedInstance
    relabeling: GraphMorphism  # iso: original carrier -> canonical carrier

    @cached_property
    def bytes(self) -> bytes:
        return serialize_instance(self.instance)


def serialize_instance(t: TypedInstance) -> bytes:
    import json

    return json.dumps(t.to_json(), sort_keys=True, separators=(",", ":")).encode()


def canonicalize_instance(t: TypedInstance) -> CanonicalInstance:
    """Relabel the carrier canonically so that two instances over the same
    schema serialize to equal bytes iff they are isomorphic as slice objects.

    The carrier canonicalization is seeded with typing colors (node types)
    and arrow labels (arrow types), so only typing-preserving relabelings
    are considered.
    """
    cf = canonicalize(
        t.carrier,
        node_colors=t.typing.node_map,
        arrow_labels=t.typing.arrow_map,
    )
    typing = compose(cf.relabeling.inverse(), t.typing)
    return CanonicalInstance(TypedInstance(typing), cf.relabeling)


@dataclass(frozen=True)
class SliceMorphism:
    from_: TypedInstance
    to: TypedInstance
    map: GraphMorphism

    def __post_init__(self) -> None:
        if self.map.dom != self.from_.carrier or self.map.cod != self.to.carrier:
            raise GraphError("slice morphism carrier map has wrong endpoints")
        if self.from_.schema != self.to.schema:
            raise GraphError("slice morphism endpoints live over different schemas")
        if compose(self.map, self.to.typing) != self.from_.typing:
            raise GraphError("slice morphism does not commute with typings")

    __hash__ = None  # type: ignore[assignment]

    def then(self, other: "SliceMorphism") -> "SliceMorphism":
        if self.to != other.from_:
            raise GraphError("cannot compose slice morphisms: endpoints differ")
        return SliceMorphism(self.from_, other.to, compose(self.map, other.map))

    @cached_property
    def is_monic(self) -> bool:
        return len(set(self.map.node_map.values())) == len(self.map.node_map) and len(
            set(self.map.arrow_map.values())
        ) == len(self.map.arrow_map)

    @classmethod
    def identity(cls, t: TypedInstance) -> "SliceMorphism":
        return cls(t, t, identity(t.carrier))


def iter_slice_morphisms(
    s: TypedInstance, t: TypedInstance
) -> Iterator[SliceMorphism]:
    """All typing-commuting carrier morphisms s -> t, in deterministic order.

    Candidates are restricted to same-type elements, which keeps the search
    far smaller than raw hom enumeration.
    """
    if s.schema != t.schema:
        return
    nodes = s.carrier.sorted_nodes
    node_candidates = {n: t.node_fiber(s.typing.node_map[n]) for n in nodes}

    def assign(i: int, node_map: dict[str, str]) -> Iterator[dict[str, str]]:
        if i == len(nodes):
            yield dict(node_map)
            return
        n = nodes[i]
        for candidate in node_candidates[n]:
            node_map[n] = candidate
            ok = True
            for a in s.carrier.sorted_arrows:
                ms, mt = node_map.get(a.src), node_map.get(a.tgt)
                if ms is None or mt is None:
                    continue
                want = s.typing.arrow_map[a.id]
                if not any(
                    x.src == ms and x.tgt == mt
                    for xid in t.arrow_fiber(want)
                    for x in [t.carrier.arrow_by_id[xid]]
                ):
                    ok = False
                    break
            if ok:
                yield from assign(i + 1, node_map)
            del node_map[n]

    arrow_ids = [a.id for a in s.carrier.sorted_arrows]
    for node_map in assign(0, {}):
        candidates = []
        for a in s.carrier.sorted_arrows:
            want = s.typing.arrow_map[a.id]
            opts = [
                xid
                for xid in t.arrow_fiber(want)
                if t.carrier.arrow_by_id[xid].src == node_map[a.src]
                and t.carrier.arrow_by_id[xid].tgt == node_map[a.tgt]
            ]
            candidates.append(opts)
        for images in itertools.product(*candidates):
            yield SliceMorphism(
                s,
                t,
                GraphMorphism(s.carrier, t.carrier, node_map, dict(zip(arrow_ids, images))),
            )


def find_instance_isomorphism(
    s: TypedInstance, t: TypedInstance
) -> Optional[SliceMorphism]:
    if len(s.carrier.nodes) != len(t.carrier.nodes) or len(s.carrier.arrows) != len(
        t.carrier.arrows
    ):
        return None
    for m in iter_slice_morphisms(s, t):
        if m.map.is_bijective:
            return m
    return None


# ---------------------------------------------------------------------------
# Restriction (pullback of instances along schema maps)


def restrict_with_projection(
    t: TypedInstance, m: GraphMorphism
) -> tuple[TypedInstance, GraphMorphism]:
    """Pull t back along m: H -> schema(t).

    Returns the restricted instance over H together with the projection
    from its carrier to the original carrier.
    """
    if t.schema != m.cod:
        raise GraphError("restriction: morphism codomain differs from the schema")
    _, p, q = pullback(t.typing, m)
    return TypedInstance(q), p


def restrict(t: TypedInstance, m: GraphMorphism) -> TypedInstance:
    return restrict_with_projection(t, m)[0]


# ---------------------------------------------------------------------------
# Indexed semantics (Grothendieck roundtrip)


@dataclass(frozen=True)
class IndexedSemantics:
    schema: Graph
    node_sets: Mapping[str, frozenset[str]]
    arrow_spans: Mapping[str, frozenset[tuple[str, str, str]]]  # (link, src el, tgt el)

    def __post_init__(self) -> None:
        object.__setattr__(
            self, "node_sets", {k: frozenset(v) for k, v in sorted(self.node_sets.items())}
        )
        object.__setattr__(
            self,
            "arrow_spans",
            {k: frozenset(tuple(x) for x in v) for k, v in sorted(self.arrow_spans.items())},
        )
        if set(self.node_sets) != self.schema.nodes:
            raise GraphError("node_sets keys must be exactly the schema nodes")
        if set(self.arrow_spans) != set(self.schema.arrow_by_id):
            raise GraphError("arrow_spans keys must be exactly the schema arrows")
        elements = [e for fiber in self.node_sets.values() for e in fiber]
        if len(elements) != len(set(elements)):
            raise GraphError("element ids must be globally unique across fibers")
        links = [l for span in self.arrow_spans.values() for (l, _, _) in span]
        if len(links) != len(set(links)) or set(links) & set(elements):
            raise GraphError("link ids must be unique and disjoint from element ids")
        for arrow_id, span in self.arrow_spans.items():
            arrow = self.schema.arrow_by_id[arrow_id]
            for link, src, tgt in span:
                if src not in self.node_sets[arrow.src]:
                    raise GraphError(f"link {link!r} source outside the source fiber")
                if tgt not in self.node_sets[arrow.tgt]:
                    raise GraphError(f"link {link!r} target outside the target fiber")


def to_indexed(t: TypedInstance) -> IndexedSemantics:
    node_sets = {n: frozenset(t.node_fiber(n)) for n in t.schema.nodes}
    arrow_spans = {}
    for a in t.schema.arrow_by_id:
        span = set()
        for link in t.arrow_fiber(a):
            arrow = t.carrier.arrow_by_id[link]
            span.add((link, arrow.src, arrow.tgt))
        arrow_spans[a] = frozenset(span)
    return IndexedSemantics(t.schema, node_sets, arrow_spans)


def from_indexed(ix: IndexedSemantics) -> TypedInstance:
    nodes = [e for fiber in ix.node_sets.values() for e in fiber]
    node_typing = {
        e: schema_node for schema_node, fiber in ix.node_sets.items() for e in fiber
    }
    arrows = []
    arrow_typing = {}
    for schema_arrow, span in ix.arrow_spans.items():
        for link, src, tgt in span:
            arrows.append((link, src, tgt))
            arrow_typing[link] = schema_arrow
    carrier = Graph.build(nodes, arrows)
    return TypedInstance.build(ix.schema, carrier, node_typing, arrow_typing)


# ---------------------------------------------------------------------------
# Deltas (span-valued updates)


@dataclass(frozen=True)
class Delta:
    source: TypedInstance
    target: TypedInstance
    apex: TypedInstance
    left: SliceMorphism
    right: SliceMorphism

    def __post_init__(self) -> None:
        if self.source.schema != self.target.schema:
            raise GraphError("delta endpoints live over different schemas")
        if self.left.from_ != self.apex or self.left.to != self.source:
            raise GraphError("delta left leg has wrong endpoints")
        if self.right.from_ != self.apex or self.right.to != self.target:
            raise GraphError("delta right leg has wrong endpoints")

    __hash__ = None  # type: ignore[assignment]

    @property
    def legs_monic(self) -> bool:
        return self.left.is_monic and self.right.is_monic

    def to_json(self) -> dict:
        return {
            "source": self.source.to_json(),
            "target": self.target.to_json(),
            "apex": self.apex.to_json(),
            "left": self.left.map.to_json(inline=False),
            "right": self.right.map.to_json(inline=False),
        }

    @classmethod
    def from_json(cls, data: Mapping) -> "Delta":
        source = TypedInstance.from_json(data["source"])
        target = TypedInstance.from_json(data["target"], schema=source.schema)
        apex = TypedInstance.from_json(data["apex"], schema=source.schema)
        left = GraphMorphism.from_json(
            data["left"], dom=apex.carrier, cod=source.carrier
        )
        right = GraphMorphism.from_json(
            data["right"], dom=apex.carrier, cod=target.carrier
        )
        return cls(
            source,
            target,
            apex,
            SliceMorphism(apex, source, left),
            SliceMorphism(apex, target, right),
        )


def identity_delta(t: TypedInstance) -> Delta:
    i = SliceMorphism.identity(t)
    return Delta(t, t, t, i, i)


def delta_of(f: SliceMorphism, direction: str = "forward") -> Delta:
    if direction == "forward":
        return Delta(f.from_, f.to, f.from_, SliceMorphism.identity(f.from_), f)
    if direction == "backward":
        return Delta(f.to, f.from_, f.from_, f, SliceMorphism.identity(f.from_))
    raise GraphError(f"unknown delta direction: {direction!r}")


def _canonical_delta(d: Delta) -> Delta:
    ci = canonicalize_instance(d.apex)
    inv = ci.relabeling.inverse()
    apex = ci.instance
    return Delta(
        d.source,
        d.target,
        apex,
        SliceMorphism(apex, d.source, compose(inv, d.left.map)),
        SliceMorphism(apex, d.target, compose(inv, d.right.map)),
    )


def compose_delta(d1: Delta, d2: Delta) -> Delta:
    if d1.target != d2.source:
        raise GraphError("cannot compose deltas: endpoints differ")
    _, p, q = pullback(d1.right.map, d2.left.map)
    apex = TypedInstance(compose(p, d1.apex.typing))
    left = SliceMorphism(apex, d1.source, compose(p, d1.left.map))
    right = SliceMorphism(apex, d2.target, compose(q, d2.right.map))
    return _canonical_delta(Delta(d1.source, d2.target, apex, left, right))


def deltas_equivalent(d1: Delta, d2: Delta) -> bool:
    """Equality up to apex isomorphism commuting with both legs."""
    if d1.source != d2.source or d1.target != d2.target:
        return False
    if len(d1.apex.carrier.nodes) != len(d2.apex.carrier.nodes) or len(
        d1.apex.carrier.arrows
    ) != len(d2.apex.carrier.arrows):
        return False
    for iso in iter_slice_morphisms(d1.apex, d2.apex):
        if not iso.map.is_bijective:
            continue
        if (
            compose(iso.map, d2.left.map) == d1.left.map
            and compose(iso.map, d2.right.map) == d1.right.map
        ):
            return True
    return False


# ---------------------------------------------------------------------------
# Fibration lifts


@dataclass(frozen=True)
class CodLift:
    """Cartesian lift of a schema map along the codomain fibration."""

    lifted: TypedInstance  # instance over the new schema
    carrier_map: GraphMorphism  # lifted carrier -> original carrier
    schema_map: GraphMorphism  # the lifted-along morphism


def cod_lift(t: TypedInstance, q: GraphMorphism) -> CodLift:
    if q.cod != t.schema:
        raise GraphError("cod_lift: morphism codomain differs from the schema")
    lifted, proj = restrict_with_projection(t, q)
    return CodLift(lifted, proj, q)


def dom_lift(t: TypedInstance, p: GraphMorphism) -> SliceMorphism:
    if p.cod != t.carrier:
        raise GraphError("dom_lift: morphism codomain differs from the carrier")
    sub = TypedInstance(compose(p, t.typing))
    return SliceMorphism(sub, t, p)


# ---------------------------------------------------------------------------
# Instance enumeration (used by oracles and soundness reports)


def iter_typed_instances(
    schema: Graph,
    max_per_node: int,
    max_parallel: int = 2,
    max_total_links: Optional[int] = None,
) -> Iterator[TypedInstance]:
    """All typed instances with at most max_per_node elements per schema node
    and at most max_parallel parallel links per (schema arrow, element pair)."""
    node_list = schema.sorted_nodes
    sizes = itertools.product(range(max_per_node + 1), repeat=len(node_list))
    for size in sizes:
        fibers = {
            n: [f"{n}#{i}" for i in range(k)] for n, k in zip(node_list, size)
        }
        slots: list[tuple[str, str, str]] = []
        for a in schema.sorted_arrows:
            for s in fibers[a.src]:
                for t in fibers[a.tgt]:
                    slots.append((a.id, s, t))
        for counts in itertools.product(range(max_parallel + 1), repeat=len(slots)):
            if max_total_links is not None and sum(counts) > max_total_links:
                continue
            nodes = [e for fiber in fibers.values() for e in fiber]
            node_typing = {e: n for n, fiber in fibers.items() for e in fiber}
            arrows = []
            arrow_typing = {}
            for (arrow_id, s, t), k in zip(slots, counts):
                for j in range(k):
                    link = f"{arrow_id}#{s}#{t}#{j}"
                    arrows.append((link, s, t))
                    arrow_typing[link] = arrow_id
            yield TypedInstance.build(
                schema, Graph.build(nodes, arrows), node_typing, arrow_typing
            )
