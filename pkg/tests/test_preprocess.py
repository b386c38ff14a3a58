"""Reductions, the edge graph, and the orientation-minimum DP."""

import itertools
import random
from fractions import Fraction

import pytest

from graphbalance import (
    Declaration,
    EdgeGraph,
    EdgeJob,
    SolveMode,
    classify_jobs,
    feasible_at,
    min_edge_load_into,
    reduce_instance,
)
from graphbalance.preprocess import DEDICATED_OVERFLOW, MULTI_CYCLE_COMPONENT

from conftest import build, loaded_general, loaded_two_valued


def enumerate_min_into(graph: EdgeGraph, subset) -> int | None:
    """Reference: try all 2^k orientations, keep those with <=1 incoming."""
    best = None
    for directions in itertools.product((0, 1), repeat=len(graph.edges)):
        in_degree = {v: 0 for v in graph.nodes}
        load = 0
        for edge, d in zip(graph.edges, directions):
            head = edge.v if d else edge.u
            in_degree[head] += 1
            if head in subset:
                load += edge.weight
        if all(c <= 1 for c in in_degree.values()):
            best = load if best is None else min(best, load)
    return best


class TestClassification:
    def test_two_valued_thresholds(self):
        inst = build(
            [("a", 0), ("b", 0), ("c", 0)],
            [("h", 10, ["a", "b"]), ("l", 3, ["a", "b", "c"])],
        )
        edges, movables = classify_jobs(inst, 15, SolveMode.TWO_VALUED)
        assert [e.id for e in edges] == ["h"]          # 10 > 7.5 and heavy
        assert [p.id for p in movables] == ["l"]
        edges, movables = classify_jobs(inst, 20, SolveMode.TWO_VALUED)
        assert edges == [] and len(movables) == 2      # 10 is not > 10

    def test_general_threshold_boundary(self):
        inst = build(
            [("a", 0), ("b", 0)],
            [("x", 71, ["a", "b"]), ("y", 70, ["a", "b"])],
        )
        edges, movables = classify_jobs(inst, 100, SolveMode.GENERAL, Fraction(7, 10))
        assert [e.id for e in edges] == ["x"]
        assert [p.id for p in movables] == ["y"]


class TestReduce:
    def test_parallel_pair_becomes_movable(self):
        # at t=8 both weights exceed beta*t = 32/7, so both are edge jobs
        inst = build(
            [("u", 0), ("v", 0)],
            [("r1", 7, ["u", "v"]), ("r2", 5, ["u", "v"])],
        )
        ctx = reduce_instance(inst, 8, SolveMode.GENERAL, Fraction(4, 7))
        assert ctx.dedicated == {"u": 5, "v": 5}
        assert len(ctx.movables) == 1
        movable = ctx.movables[0]
        assert movable.weight == 2 and movable.eligible == frozenset({"u", "v"})
        assert not ctx.graph.edges

    def test_equal_parallel_pair_drops_movable(self):
        inst = build(
            [("u", 0), ("v", 0)],
            [("r1", 6, ["u", "v"]), ("r2", 6, ["u", "v"])],
        )
        ctx = reduce_instance(inst, 10, SolveMode.GENERAL, Fraction(4, 7))
        assert ctx.dedicated == {"u": 6, "v": 6}
        assert not ctx.movables
        full = ctx.expand({})
        assert sorted(full) == ["r1", "r2"] and {full["r1"], full["r2"]} == {"u", "v"}

    def test_two_cycles_declared(self):
        nodes = [("a", 0), ("b", 0), ("c", 0), ("d", 0)]
        edges = [
            ("ab", 6, ["a", "b"]), ("bc", 6, ["b", "c"]), ("ca", 6, ["c", "a"]),
            ("cd", 6, ["c", "d"]), ("db", 6, ["d", "b"]),
        ]
        decl = reduce_instance(build(nodes, edges), 10, SolveMode.GENERAL, Fraction(4, 7))
        assert isinstance(decl, Declaration)
        assert decl.kind == MULTI_CYCLE_COMPONENT
        assert len(decl.payload["edges"]) == 5 and len(decl.payload["nodes"]) == 4

    def test_pendant_edge_of_cycle_is_folded(self):
        nodes = [("a", 0), ("b", 0), ("c", 0), ("d", 0)]
        edges = [
            ("ab", 6, ["a", "b"]), ("bc", 6, ["b", "c"]), ("ca", 6, ["c", "a"]),
            ("cd", 6, ["c", "d"]),
        ]
        ctx = reduce_instance(build(nodes, edges), 10, SolveMode.GENERAL, Fraction(4, 7))
        assert ctx.dedicated["d"] == 6
        assert ("cd", "d") in ctx.forced
        comps = ctx.graph.components()
        kinds = sorted(c.kind for c in comps)
        assert kinds == ["cycle", "isolated"]

    def test_dedicated_overflow_declared(self):
        inst = build([("a", 11), ("b", 0)], [("j", 5, ["a", "b"])])
        decl = reduce_instance(inst, 10, SolveMode.GENERAL, Fraction(4, 7))
        assert isinstance(decl, Declaration) and decl.kind == DEDICATED_OVERFLOW
        assert decl.payload["machine"] == "a"

    def test_single_machine_jobs_fold(self):
        inst = build(
            [("a", 1), ("b", 0)],
            [("s", 4, ["a"]), ("j", 5, ["a", "b"])],
        )
        ctx = reduce_instance(inst, 10, SolveMode.GENERAL, Fraction(4, 7))
        assert ctx.dedicated["a"] == 5
        assert ("s", "a") in ctx.forced

    @pytest.mark.parametrize("seed", range(60))
    def test_reduce_is_idempotent(self, seed):
        inst = loaded_general(seed, Fraction(7, 10))
        t = max(inst.max_weight(), inst.total_weight() // 2)
        ctx = reduce_instance(inst, t, SolveMode.GENERAL, Fraction(7, 10))
        if isinstance(ctx, Declaration):
            return
        again = reduce_instance(ctx.to_instance(), t, SolveMode.GENERAL, Fraction(7, 10))
        assert not isinstance(again, Declaration)
        assert again.dedicated == ctx.dedicated
        assert {p.id for p in again.movables} == {p.id for p in ctx.movables}
        assert {e.id for e in again.graph.edges} == {e.id for e in ctx.graph.edges}

    def test_everything_normalized_after_reduce(self):
        for seed in range(80):
            inst = loaded_general(seed, Fraction(7, 10))
            t = inst.max_weight() + seed % 5
            ctx = reduce_instance(inst, t, SolveMode.GENERAL, Fraction(7, 10))
            if isinstance(ctx, Declaration):
                continue
            for comp in ctx.graph.components():
                assert comp.kind in ("isolated", "tree", "cycle")
                assert len(comp.edges) <= len(comp.nodes)
            pairs = [e.ends for e in ctx.graph.edges]
            assert len(pairs) == len(set(pairs))  # no parallel edges left
            assert all(len(p.eligible) >= 2 for p in ctx.movables)


class TestEquivalence:
    """Reducing must not change feasibility at the guess."""

    @pytest.mark.parametrize("seed", range(120))
    def test_general_mode(self, seed):
        beta = Fraction(7, 10)
        inst = loaded_general(seed, beta)
        base = inst.max_weight()
        for t in (base, base + 2, base + 5):
            original = feasible_at(inst, t)
            reduced = reduce_instance(inst, t, SolveMode.GENERAL, beta)
            if isinstance(reduced, Declaration):
                assert not original
            else:
                assert feasible_at(reduced.to_instance(), t) == original

    @pytest.mark.parametrize("seed", range(120))
    def test_two_valued_mode(self, seed):
        inst, heavy, light = loaded_two_valued(seed)
        base = inst.max_weight()
        for t in (base, base + 3):
            original = feasible_at(inst, t)
            reduced = reduce_instance(inst, t, SolveMode.TWO_VALUED)
            if isinstance(reduced, Declaration):
                assert not original
            else:
                assert feasible_at(reduced.to_instance(), t) == original

    @pytest.mark.parametrize("seed", range(40))
    def test_expand_covers_all_jobs(self, seed):
        beta = Fraction(7, 10)
        inst = loaded_general(seed, beta)
        t = inst.total_weight()
        ctx = reduce_instance(inst, t, SolveMode.GENERAL, beta)
        assert not isinstance(ctx, Declaration)
        core = {}
        for p in ctx.movables:
            core[p.id] = ctx.sorted_eligible(p)[0]
        for e in ctx.graph.edges:
            core[e.id] = e.u
        full = ctx.expand(core)
        assert set(full) == {j.id for j in inst.jobs}


class TestMinEdgeLoad:
    def test_path_avoids_middle(self):
        g = EdgeGraph(
            ("u", "v", "w"),
            (EdgeJob("e1", "u", "v", 5), EdgeJob("e2", "v", "w", 5)),
        )
        assert min_edge_load_into(g, {"v"}) == 0

    def test_cycle_forces_one_edge(self):
        g = EdgeGraph(
            ("a", "b", "c"),
            (
                EdgeJob("e1", "a", "b", 5),
                EdgeJob("e2", "b", "c", 5),
                EdgeJob("e3", "c", "a", 5),
            ),
        )
        for node in ("a", "b", "c"):
            assert min_edge_load_into(g, {node}) == 5

    def test_star_center_takes_nothing(self):
        g = EdgeGraph(
            ("c", "x", "y", "z"),
            (
                EdgeJob("e1", "c", "x", 4),
                EdgeJob("e2", "c", "y", 5),
                EdgeJob("e3", "c", "z", 6),
            ),
        )
        # frozen from enumerate_min_into over all 8 orientations
        assert enumerate_min_into(g, {"c"}) == 0
        assert min_edge_load_into(g, {"c"}) == 0

    def test_unknown_node_raises(self):
        g = EdgeGraph(("a", "b"), (EdgeJob("e", "a", "b", 3),))
        with pytest.raises(KeyError):
            min_edge_load_into(g, {"zz"})

    def test_multi_cycle_unreachable(self):
        g = EdgeGraph(
            ("a", "b"),
            (
                EdgeJob("e1", "a", "b", 3),
                EdgeJob("e2", "a", "b", 3),
                EdgeJob("e3", "a", "b", 3),
            ),
        )
        assert min_edge_load_into(g, {"a"}) is None

    @pytest.mark.parametrize("seed", range(250))
    def test_matches_exhaustive_enumeration(self, seed):
        rng = random.Random(seed)
        n = rng.randint(2, 7)
        nodes = tuple(f"v{i}" for i in range(n))
        k = rng.randint(1, min(10, n + 1))
        edges = []
        for i in range(k):
            u, v = rng.sample(nodes, 2)
            edges.append(EdgeJob(f"e{i}", u, v, rng.randint(1, 9)))
        graph = EdgeGraph(nodes, tuple(edges))
        subset = set(rng.sample(nodes, rng.randint(1, n)))
        assert min_edge_load_into(graph, subset) == enumerate_min_into(graph, subset)
