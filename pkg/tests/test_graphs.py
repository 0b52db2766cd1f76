import os
import random

import pytest

from dcl.graphs import (
    Graph,
    GraphError,
    GraphMorphism,
    SizeGuardError,
    canonical_bytes,
    canonicalize,
    compose,
    enumerate_homomorphisms,
    find_isomorphism,
    identity,
    iter_homomorphisms,
    pair_id,
    pullback,
    pushout,
)
from dcl.randgen import random_graph, random_morphism_into


def triangle():
    return Graph.build(["a", "b", "c"], [("ab", "a", "b"), ("bc", "b", "c"), ("ca", "c", "a")])


class TestGraphValidation:
    def test_arrow_endpoint_outside_nodes(self):
        with pytest.raises(GraphError):
            Graph.build(["a"], [("e", "a", "missing")])

    def test_duplicate_arrow_ids(self):
        with pytest.raises(GraphError):
            Graph.build(["a", "b"], [("e", "a", "a"), ("e", "a", "b")])

    def test_node_arrow_id_clash(self):
        with pytest.raises(GraphError):
            Graph.build(["a", "x"], [("x", "a", "a")])

    def test_json_roundtrip(self):
        g = triangle()
        assert Graph.from_json(g.to_json()) == g

    def test_malformed_json(self):
        with pytest.raises(GraphError):
            Graph.from_json({"nodes": ["a"]})


class TestMorphisms:
    def test_totality_enforced(self):
        g, h = triangle(), triangle()
        with pytest.raises(GraphError):
            GraphMorphism(g, h, {"a": "a"}, {})

    def test_incidence_enforced(self):
        g = Graph.build(["a", "b"], [("e", "a", "b")])
        h = Graph.build(["x", "y"], [("f", "x", "y")])
        with pytest.raises(GraphError):
            GraphMorphism(g, h, {"a": "y", "b": "x"}, {"e": "f"})

    def test_identity_laws(self):
        g = triangle()
        h = Graph.build(["x"], [("l", "x", "x")])
        m = GraphMorphism(g, h, {n: "x" for n in g.nodes}, {a.id: "l" for a in g.arrows})
        assert compose(identity(g), m) == m
        assert compose(m, identity(h)) == m

    def test_compose_associative(self):
        rng = random.Random(1)
        for _ in range(20):
            c = random_graph(rng, 4, 5)
            h = random_morphism_into(rng, c)
            g = random_morphism_into(rng, h.dom)
            f = random_morphism_into(rng, g.dom)
            assert compose(compose(f, g), h) == compose(f, compose(g, h))

    def test_compose_mismatch(self):
        g, h = triangle(), Graph.build(["x"])
        with pytest.raises(GraphError):
            compose(identity(g), identity(h))

    def test_inverse_of_non_iso(self):
        g = Graph.build(["a", "b"])
        h = Graph.build(["x"])
        m = GraphMorphism(g, h, {"a": "x", "b": "x"}, {})
        with pytest.raises(GraphError):
            m.inverse()


class TestHomSearch:
    def test_count_into_complete_graph(self):
        # 2-chain into the 2-clique with loops absent: 2 node choices each,
        # arrow forced when endpoints differ
        chain = Graph.build(["a", "b"], [("e", "a", "b")])
        k2 = Graph.build(["x", "y"], [("xy", "x", "y"), ("yx", "y", "x")])
        homs = list(iter_homomorphisms(chain, k2))
        assert len(homs) == 2

    def test_deterministic_order(self):
        chain = Graph.build(["a", "b"], [("e", "a", "b")])
        k2 = Graph.build(["x", "y"], [("xy", "x", "y"), ("yx", "y", "x")])
        first = [m.node_map for m in iter_homomorphisms(chain, k2)]
        second = [m.node_map for m in iter_homomorphisms(chain, k2)]
        assert first == second

    def test_truncation_flag(self):
        g = Graph.build(["a"])
        h = Graph.build([f"n{i}" for i in range(5)])
        res = enumerate_homomorphisms(g, h, limit=3)
        assert res.truncated and len(res) == 3

    def test_empty_domain_has_unique_hom(self):
        res = enumerate_homomorphisms(Graph.empty(), triangle())
        assert len(res) == 1 and not res.truncated

    def test_no_homs_into_empty(self):
        assert len(enumerate_homomorphisms(triangle(), Graph.empty())) == 0

    def test_parallel_arrows_multiply(self):
        par = Graph.build(["a", "b"], [("e1", "a", "b"), ("e2", "a", "b")])
        homs = list(iter_homomorphisms(par, par))
        # node map a->a,b->b gives 2*2 arrow choices; no other node maps
        # admit arrows between the images
        assert len(homs) == 4

    def test_find_isomorphism(self):
        g = triangle()
        h = Graph.build(["p", "q", "r"], [("x", "p", "q"), ("y", "q", "r"), ("z", "r", "p")])
        iso = find_isomorphism(g, h)
        assert iso is not None and iso.is_bijective
        assert find_isomorphism(g, Graph.build(["p", "q", "r"])) is None


class TestPullback:
    def test_projections_commute(self):
        rng = random.Random(2)
        for _ in range(25):
            c = random_graph(rng, 4, 5)
            f = random_morphism_into(rng, c)
            g = random_morphism_into(rng, c)
            p_graph, p, q = pullback(f, g)
            assert compose(p, f) == compose(q, g)

    def test_universal_property(self):
        rng = random.Random(3)
        for _ in range(10):
            c = random_graph(rng, 3, 3)
            f = random_morphism_into(rng, c, 3, 3)
            g = random_morphism_into(rng, c, 3, 3)
            p_graph, p, q = pullback(f, g)
            # any competitor cone factors uniquely
            z = random_morphism_into(rng, f.dom, 3, 3)
            w_node = {n: g.node_map for n in ()}
            # build a competitor by pairing z with a compatible map into g.dom
            for h in iter_homomorphisms(z.dom, g.dom):
                if compose(z, f) != compose(h, g):
                    continue
                mediators = [
                    u
                    for u in iter_homomorphisms(z.dom, p_graph)
                    if compose(u, p) == z and compose(u, q) == h
                ]
                assert len(mediators) == 1
                break

    def test_pullback_along_identity(self):
        g = triangle()
        p_graph, p, q = pullback(identity(g), identity(g))
        assert len(p_graph.nodes) == 3 and len(p_graph.arrows) == 3
        assert "(a|a)" in p_graph.nodes

    def test_pair_ids(self):
        assert pair_id("x", "y") == "(x|y)"


class TestPushout:
    def test_injections_commute(self):
        rng = random.Random(4)
        checked = 0
        for _ in range(40):
            dom = random_graph(rng, 3, 3, min_nodes=0)
            codl = random_graph(rng, 4, 5)
            codr = random_graph(rng, 4, 5)
            homl = enumerate_homomorphisms(dom, codl, limit=5).morphisms
            homr = enumerate_homomorphisms(dom, codr, limit=5).morphisms
            if not homl or not homr:
                continue
            checked += 1
            fl, fr = homl[0], homr[0]
            p_graph, il, ir = pushout(fl, fr)
            assert compose(fl, il) == compose(fr, ir)
        assert checked >= 10

    def test_universal_property_small(self):
        dom = Graph.build(["s"])
        codl = Graph.build(["x", "y"], [("e", "x", "y")])
        codr = Graph.build(["u"])
        fl = GraphMorphism(dom, codl, {"s": "x"}, {})
        fr = GraphMorphism(dom, codr, {"s": "u"}, {})
        p_graph, il, ir = pushout(fl, fr)
        # x and u are identified; y stays separate
        assert len(p_graph.nodes) == 2 and len(p_graph.arrows) == 1
        # competitor: collapse everything to a loop graph
        z = Graph.build(["z"], [("l", "z", "z")])
        zl = GraphMorphism(codl, z, {"x": "z", "y": "z"}, {"e": "l"})
        zr = GraphMorphism(codr, z, {"u": "z"}, {})
        mediators = [
            u
            for u in iter_homomorphisms(p_graph, z)
            if compose(il, u) == zl and compose(ir, u) == zr
        ]
        assert len(mediators) == 1

    def test_pushout_over_empty_is_disjoint_union(self):
        empty = Graph.empty()
        a = Graph.build(["n"], [("l", "n", "n")])
        b = Graph.build(["m"])
        p_graph, il, ir = pushout(
            GraphMorphism(empty, a, {}, {}), GraphMorphism(empty, b, {}, {})
        )
        assert len(p_graph.nodes) == 2 and len(p_graph.arrows) == 1


class TestCanonicalForms:
    def test_iso_invariance(self):
        rng = random.Random(5)
        for _ in range(30):
            g = random_graph(rng, 6, 8)
            # random relabeling
            perm = list(g.sorted_nodes)
            rng.shuffle(perm)
            node_map = dict(zip(g.sorted_nodes, perm))
            arrows = [(f"r_{a.id}", node_map[a.src], node_map[a.tgt]) for a in g.sorted_arrows]
            h = Graph.build(perm, arrows)
            assert canonical_bytes(g) == canonical_bytes(h)

    def test_distinguishes_non_isomorphic(self):
        g = Graph.build(["a", "b"], [("e", "a", "b")])
        h = Graph.build(["a", "b"], [("e", "a", "a")])
        assert canonical_bytes(g) != canonical_bytes(h)

    def test_idempotent(self):
        rng = random.Random(6)
        for _ in range(20):
            g = random_graph(rng, 5, 6)
            c1 = canonicalize(g).graph
            c2 = canonicalize(c1).graph
            assert c1 == c2

    def test_relabeling_is_iso(self):
        g = triangle()
        cf = canonicalize(g)
        assert cf.relabeling.is_bijective
        assert cf.relabeling.dom == g and cf.relabeling.cod == cf.graph

    def test_regular_graph_needs_individualization(self):
        # two directed 3-cycles vs a directed 6-cycle: same degree sequence
        two = Graph.build(
            ["a", "b", "c", "d", "e", "f"],
            [("1", "a", "b"), ("2", "b", "c"), ("3", "c", "a"),
             ("4", "d", "e"), ("5", "e", "f"), ("6", "f", "d")],
        )
        six = Graph.build(
            ["a", "b", "c", "d", "e", "f"],
            [("1", "a", "b"), ("2", "b", "c"), ("3", "c", "d"),
             ("4", "d", "e"), ("5", "e", "f"), ("6", "f", "a")],
        )
        assert canonical_bytes(two) != canonical_bytes(six)

    def test_size_guard(self):
        big = Graph.build([f"n{i}" for i in range(100)])
        with pytest.raises(SizeGuardError):
            canonicalize(big)
        assert canonicalize(big, max_nodes=100).graph is not None

    def test_size_guard_env(self, monkeypatch):
        monkeypatch.setenv("DCL_SIZE_GUARD", "2")
        with pytest.raises(SizeGuardError):
            canonicalize(triangle())
        monkeypatch.setenv("DCL_SIZE_GUARD", "200")
        canonicalize(triangle())
