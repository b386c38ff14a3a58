"""Two-weight core: classification, labeling, pushes, and full runs."""

from dataclasses import replace
from fractions import Fraction

import pytest

from graphbalance import (
    Declaration,
    SolveMode,
    StaleMoveError,
    feasible_at,
    reduce_instance,
    validate,
    verify_solution,
)
from graphbalance.push import PushMove, potential_value
from graphbalance.two_valued import (
    NodeClass,
    Thresholds,
    TwoValuedState,
    apply_push,
    classify_node,
    component_is_stuck,
    label_levels,
    find_push,
    run_two_valued,
)

from conftest import build, loaded_two_valued


def make_state(machines, jobs, t, placement=None, variant="standard"):
    inst = build(machines, jobs, SolveMode.TWO_VALUED)
    ctx = reduce_instance(inst, t, SolveMode.TWO_VALUED)
    assert not isinstance(ctx, Declaration)
    factory = Thresholds.standard if variant == "standard" else Thresholds.improved
    thresholds = factory(t, ctx.heavy_weight, ctx.light_weight)
    return TwoValuedState(ctx, thresholds, placement)


class TestClassification:
    # t=10, heavy=6, light=2: thresholds are 7 / 9 / 15; machine 'a' gets
    # its combined load from dedicated weight plus lights parked on it
    def node_a(self, dedicated, lights_on_a):
        machines = [("a", dedicated), ("b", 0), ("c", 0)]
        jobs = [("h", 6, ["b", "c"]), ("lfar", 2, ["b", "c"])]
        placement = {"lfar": "b"}
        for i in range(lights_on_a):
            jobs.append((f"l{i}", 2, ["a", "b"]))
            placement[f"l{i}"] = "a"
        return make_state(machines, jobs, t=10, placement=placement)

    def test_boundary_is_safe(self):
        assert classify_node("a", self.node_a(7, 0)) == NodeClass.SAFE

    def test_middle_gap_exists(self):
        assert classify_node("a", self.node_a(8, 0)) == NodeClass.MIDDLE
        assert classify_node("a", self.node_a(9, 0)) == NodeClass.MIDDLE

    def test_tight(self):
        assert classify_node("a", self.node_a(8, 1)) == NodeClass.TIGHT

    def test_overfull(self):
        assert classify_node("a", self.node_a(10, 3)) == NodeClass.OVERFULL
        assert classify_node("a", self.node_a(9, 3)) == NodeClass.TIGHT

    def test_improved_thresholds(self):
        th = Thresholds.improved(10, 6, 3)
        assert th.safe_max == Fraction(4)          # 10+3-6-3
        assert th.tight_floor == Fraction(7)
        assert th.overfull_floor == Fraction(13)
        assert th.makespan_bound == Fraction(13)


class TestComponentStatus:
    def test_overfull_isolated_is_stuck(self):
        state = make_state(
            [("a", 10), ("b", 0), ("c", 0)],
            [("h", 6, ["b", "c"])] + [(f"l{i}", 2, ["a", "b"]) for i in range(3)],
            t=10,
            placement={f"l{i}": "a" for i in range(3)},
        )
        comp = state.component_of["a"]
        assert comp.kind == "isolated"
        assert component_is_stuck(comp, state)

    def test_tree_with_one_tight_is_clear(self):
        state = make_state(
            [("a", 10), ("b", 0), ("c", 0)],
            [("h", 6, ["a", "b"]), ("l0", 2, ["a", "c"])],
            t=10,
            placement={"l0": "a"},
        )
        comp = state.component_of["a"]
        assert comp.kind == "tree"
        assert classify_node("a", state) == NodeClass.TIGHT
        assert not component_is_stuck(comp, state)

    def test_cycle_with_one_tight_is_stuck(self):
        state = make_state(
            [("a", 10), ("b", 0), ("c", 0)],
            [
                ("h1", 6, ["a", "b"]),
                ("h2", 6, ["b", "c"]),
                ("h3", 6, ["c", "a"]),
                ("l0", 2, ["a", "b"]),
            ],
            t=10,
            placement={"l0": "a"},
        )
        comp = state.component_of["a"]
        assert comp.kind == "cycle"
        assert classify_node("a", state) == NodeClass.TIGHT
        assert component_is_stuck(comp, state)


def overfull_isolated_state():
    """'a' is overfull from parked lights; 'b'/'c' carry one edge job."""
    return make_state(
        [("a", 10), ("b", 0), ("c", 0)],
        [("h", 6, ["b", "c"])] + [(f"l{i}", 2, ["a", "b"]) for i in range(3)],
        t=10,
        placement={f"l{i}": "a" for i in range(3)},
    )


class TestExplore:
    def test_no_stuck_component_labels_nothing(self):
        state = make_state(
            [("a", 0), ("b", 0)],
            [("h", 6, ["a", "b"]), ("l", 2, ["a", "b"])],
            t=10,
        )
        label_levels(state)
        assert state.levels == {}

    def test_single_overfull_source_spreads_one_level(self):
        state = overfull_isolated_state()
        label_levels(state)
        assert state.levels == {"a": 0, "b": 1}

    def test_rerun_is_identical(self):
        for seed in range(30):
            inst, _, _ = loaded_two_valued(seed)
            report = validate(inst, SolveMode.TWO_VALUED)
            if not report.ok:
                continue
            heavy, light = report.heavy_weight, report.light_weight
            t = max(inst.max_weight(), 2 * light)
            if not (2 * light <= t < 2 * heavy):
                continue
            ctx = reduce_instance(inst, t, SolveMode.TWO_VALUED)
            if isinstance(ctx, Declaration):
                continue
            state = TwoValuedState(ctx, Thresholds.standard(t, heavy, light))
            label_levels(state)
            first = dict(state.levels)
            label_levels(state)
            assert state.levels == first

    def test_clear_tree_tight_node_joins_batch_round(self):
        # overfull 'a' reaches 'b'; 'c' is the tight node of the clear tree
        # {b, c, d} and is pulled in at the same level as 'b'
        state = make_state(
            [("a", 10), ("b", 0), ("c", 9), ("d", 0)],
            [("h1", 6, ["b", "c"]), ("h2", 6, ["c", "d"]),
             ("lc", 2, ["c", "d"])]
            + [(f"l{i}", 2, ["a", "b"]) for i in range(3)],
            t=10,
            placement={"lc": "c", **{f"l{i}": "a" for i in range(3)}},
        )
        assert classify_node("c", state) == NodeClass.TIGHT
        label_levels(state)
        assert state.levels["a"] == 0
        assert state.levels["b"] == 1
        assert state.levels["c"] == 1
        assert state.levels["d"] == 2  # reached through the light parked on c


class TestPush:
    def test_no_labels_no_push(self):
        state = make_state(
            [("a", 0), ("b", 0)],
            [("h", 6, ["a", "b"]), ("l", 2, ["a", "b"])],
            t=10,
        )
        label_levels(state)
        assert find_push(state) is None

    def test_push_from_overfull_to_safe(self):
        state = overfull_isolated_state()
        label_levels(state)
        move = find_push(state)
        assert move == PushMove("l0", "a", "b")

    def test_lowest_source_level_wins(self):
        # sources available at levels 0 and 1; the level-0 one must be chosen
        state = make_state(
            [("a", 10), ("b", 0), ("c", 0), ("d", 0)],
            [("h", 9, ["c", "d"]), ("lb", 2, ["b", "c"])]
            + [(f"l{i}", 2, ["a", "b"]) for i in range(3)],
            t=10,
            placement={"lb": "b", **{f"l{i}": "a" for i in range(3)}},
        )
        label_levels(state)
        assert state.levels["a"] == 0 and state.levels["b"] == 1
        assert state.levels["c"] == 2
        move = find_push(state)
        assert move.source == "a"

    def test_apply_push_drops_potential_and_keeps_levels(self):
        state = overfull_isolated_state()
        label_levels(state)
        before_levels = dict(state.levels)
        before_potential = potential_value(state.ctx, state.placement, state.levels)
        apply_push(state, find_push(state))
        after_potential = potential_value(state.ctx, state.placement, state.levels)
        assert after_potential < before_potential
        for v, lvl in before_levels.items():
            assert state.levels.get(v, 10 ** 9) >= lvl

    def test_stale_move_rejected(self):
        state = overfull_isolated_state()
        label_levels(state)
        move = find_push(state)
        apply_push(state, move)
        with pytest.raises(StaleMoveError):
            apply_push(state, move)


class TestRunCore:
    def test_no_edges_immediate_success(self):
        # movables only; the edge graph is empty and nothing is stuck
        inst = build(
            [("a", 0), ("b", 0)],
            [("l1", 2, ["a", "b"]), ("l2", 2, ["a", "b"])],
        )
        ctx = reduce_instance(inst, 10, SolveMode.GENERAL, Fraction(4, 7))
        ctx = replace(ctx, mode=SolveMode.TWO_VALUED, heavy_weight=6, light_weight=2)
        result, stats = run_two_valued(ctx)
        assert not isinstance(result, Declaration)
        valid, makespan = verify_solution(inst, ctx.expand(result))
        assert valid and Fraction(makespan) <= Fraction(15)

    def test_single_edge_job_oriented_either_way(self):
        inst = build([("a", 0), ("b", 0)], [("r", 10, ["a", "b"])], SolveMode.TWO_VALUED)
        ctx = reduce_instance(inst, 10, SolveMode.TWO_VALUED)
        result, stats = run_two_valued(ctx)
        assert result["r"] in ("a", "b")
        valid, makespan = verify_solution(inst, ctx.expand(result))
        assert valid and makespan == 10

    @pytest.mark.parametrize("seed", range(150))
    def test_random_runs_sound_and_bounded(self, seed):
        inst, _, _ = loaded_two_valued(seed)
        report = validate(inst, SolveMode.TWO_VALUED)
        if not report.ok:
            return  # all lights ended single-machine: not a two-weight instance
        heavy, light = report.heavy_weight, report.light_weight
        in_regime = range(max(inst.max_weight(), 2 * light), 2 * heavy)
        for t in list(in_regime)[:4]:
            ctx = reduce_instance(inst, t, SolveMode.TWO_VALUED)
            if isinstance(ctx, Declaration):
                assert not feasible_at(inst, t)
                continue
            variant = "improved" if heavy >= 2 * light else "standard"
            result, stats = run_two_valued(ctx, variant=variant)
            if isinstance(result, Declaration):
                assert not feasible_at(inst, t)
            else:
                bound = (
                    Fraction(3 * t, 2)
                    if variant == "standard"
                    else Fraction(t + heavy // 2)
                )
                valid, makespan = verify_solution(inst, ctx.expand(result))
                assert valid and Fraction(makespan) <= bound
            if stats.potentials:
                assert all(
                    a > b for a, b in zip(stats.potentials, stats.potentials[1:])
                )
