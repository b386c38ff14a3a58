"""General-weights core for heavy jobs restricted to two machines.

Edges of the reduced graph are oriented dynamically.  High loads force edges
away from a machine, and those orientations cascade.  If overloaded machines
remain, a conflict set is grown backwards along directed edges (helped by
speculative "fake" orientations pointing away from it), machines inside it
are activated by two threshold rules, and one movable is pushed one level
outward per iteration.  Either all overloads dissolve and the remaining
neutral edges are oriented with at most one extra incoming edge per machine,
or no push applies and the activated set is returned as an infeasibility
witness.
"""

from __future__ import annotations

from dataclasses import dataclass, field
from fractions import Fraction

from .errors import InvariantViolation, RegimeError
from .preprocess import (
    ACTIVATED_SET,
    Declaration,
    EdgeJob,
    GuessContext,
    _cycle_sequence,
    min_edge_load_into,
)
from .push import (
    CoreStats,
    PushMove,
    check_levels_monotone,
    check_push_budget,
    initial_placement,
    movable_loads,
    movables_by_machine,
    potential_value,
)


@dataclass(frozen=True)
class ThresholdsG:
    overload_bound: Fraction   # exclusive: more than this is overloaded
    push_bound: Fraction       # inclusive ceiling for push targets
    rule2_bound: Fraction      # exclusive: lighter edges spread activation

    @staticmethod
    def make(t: int, beta: Fraction) -> "ThresholdsG":
        return ThresholdsG(
            (Fraction(5, 3) + beta / 3) * t,
            (Fraction(5, 3) - 2 * beta / 3) * t,
            (Fraction(2, 3) + beta / 3) * t,
        )


class Orientation:
    """Mutable edge directions; ``head[e]`` is None while e is neutral."""

    def __init__(self, graph):
        self.graph = graph
        self.head: dict[str, str | None] = {e.id: None for e in graph.edges}
        self.in_load: dict[str, int] = {v: 0 for v in graph.nodes}
        self.in_degree: dict[str, int] = {v: 0 for v in graph.nodes}

    def direct(self, edge: EdgeJob, head: str) -> None:
        assert self.head[edge.id] is None and head in (edge.u, edge.v)
        self.head[edge.id] = head
        self.in_load[head] += edge.weight
        self.in_degree[head] += 1

    def neutral(self, edge: EdgeJob) -> bool:
        return self.head[edge.id] is None

    def fathers(self, v: str) -> list[tuple[EdgeJob, str]]:
        """Edges at v directed away from it, with the node they point to."""
        out = []
        for e in self.graph.incident(v):
            other = e.other(v)
            if self.head[e.id] == other:
                out.append((e, other))
        return out

    def children(self, v: str) -> list[tuple[EdgeJob, str]]:
        """Edges at v directed into it, with the node they come from."""
        out = []
        for e in self.graph.incident(v):
            if self.head[e.id] == v:
                out.append((e, e.other(v)))
        return out


def _overloaded(ctx, orient, ml, th) -> set[str]:
    return {
        v
        for v in ctx.machine_ids
        if ctx.dedicated[v] + ml[v] + orient.in_load[v] > th.overload_bound
    }


def forced_orientations(
    ctx: GuessContext,
    orient: Orientation,
    ml: dict[str, int],
    th: ThresholdsG,
    trace: list | None = None,
) -> None:
    """Cascade every orientation the loads force.

    While some machine cannot absorb an incident neutral edge on top of its
    current load, that edge is directed away, and the propagation continues
    from the freshly marked heads.  Ties follow the (source id, target id)
    order, so the procedure is deterministic and idempotent.
    """

    def candidates(restrict: set[str] | None):
        found = []
        for e in ctx.graph.edges:
            if not orient.neutral(e):
                continue
            for v, u in ((e.u, e.v), (e.v, e.u)):
                if restrict is not None and v not in restrict:
                    continue
                if ctx.dedicated[v] + ml[v] + orient.in_load[v] + e.weight > th.overload_bound:
                    found.append((v, u, e))
        found.sort(key=lambda c: (c[0], c[1]))
        return found

    while True:
        outer = candidates(None)
        if not outer:
            return
        v, u, e = outer[0]
        orient.direct(e, u)
        if trace is not None:
            trace.append({"event": "forced", "edge": e.id, "from": v, "to": u})
        marked = {u}
        while True:
            inner = candidates(marked)
            if not inner:
                break
            v2, u2, e2 = inner[0]
            orient.direct(e2, u2)
            marked.add(u2)
            if trace is not None:
                trace.append({"event": "forced", "edge": e2.id, "from": v2, "to": u2})


@dataclass
class ExploreResult:
    orientation: Orientation
    levels: dict[str, int]
    conflict: set[str]
    round_activated: list[list[str]] = field(default_factory=list)
    round_conflict: list[set[str]] = field(default_factory=list)
    initial_overloaded: set[str] = field(default_factory=set)


def explore(
    ctx: GuessContext,
    placement: dict[str, str],
    th: ThresholdsG,
    fake_picker=None,
    trace: list | None = None,
) -> ExploreResult:
    """Orient, grow the conflict set, and activate machines round by round.

    Round 0 starts from the machines still overloaded after the initial
    cascade; each later round starts from the machines reachable by a movable
    from the previous round.  Within a round, the conflict set absorbs every
    machine with a directed path into it, alternating with single fake
    orientations away from it, until neither applies; then the two activation
    rules run to a fixpoint.  The fake-orientation order (pluggable through
    *fake_picker*) does not affect the conflict sets or any edge outside them.
    """
    ml = movable_loads(ctx, placement)
    orient = Orientation(ctx.graph)
    forced_orientations(ctx, orient, ml, th, trace)
    overloaded0 = _overloaded(ctx, orient, ml, th)

    levels: dict[str, int] = {}
    conflict: set[str] = set()
    result = ExploreResult(orient, levels, conflict, initial_overloaded=set(overloaded0))
    at = movables_by_machine(ctx, placement)

    def guard_overload() -> None:
        now = _overloaded(ctx, orient, ml, th)
        if not now <= overloaded0:
            raise InvariantViolation(
                f"machines became overloaded after the initial cascade: "
                f"{sorted(now - overloaded0)}"
            )

    round_no = 0
    while True:
        if round_no == 0:
            batch = sorted(overloaded0, key=ctx.index)
        else:
            previous = result.round_activated[round_no - 1]
            reachable: set[str] = set()
            for u in previous:
                for p in at[u]:
                    reachable.update(
                        x for x in p.eligible if x != u and x not in levels
                    )
            batch = sorted(reachable, key=ctx.index)
        if not batch:
            break
        for v in batch:
            levels[v] = round_no
        activated_now = list(batch)
        conflict_now = set(batch)
        conflict.update(batch)

        while True:
            while True:
                absorbed = [
                    v
                    for v in ctx.machine_ids
                    if v not in conflict
                    and any(u in conflict for _, u in orient.fathers(v))
                ]
                if not absorbed:
                    break
                for v in absorbed:
                    conflict.add(v)
                    conflict_now.add(v)
                    if trace is not None:
                        trace.append({"event": "absorb", "machine": v})
            fakes = []
            for e in ctx.graph.edges:
                if not orient.neutral(e):
                    continue
                for v, u in ((e.u, e.v), (e.v, e.u)):
                    if v in conflict:
                        fakes.append((v, u, e))
            if not fakes:
                break
            fakes.sort(key=lambda c: (c[0], c[1]))
            v, u, e = fake_picker(fakes) if fake_picker else fakes[0]
            orient.direct(e, u)
            if trace is not None:
                trace.append({"event": "fake", "edge": e.id, "from": v, "to": u})
            forced_orientations(ctx, orient, ml, th, trace)
            guard_overload()

        while True:
            extra = []
            for v in sorted(conflict - set(levels), key=ctx.index):
                rule1 = any(
                    ctx.dedicated[v] + ml[v] + e.weight > th.overload_bound
                    for e, u in orient.fathers(v)
                    if u in conflict
                )
                rule2 = False
                if not rule1:
                    rule2 = any(
                        u in levels and e.weight < th.rule2_bound
                        for e, u in orient.fathers(v) + orient.children(v)
                        if u in conflict
                    )
                if rule1 or rule2:
                    extra.append((v, "activate_r1" if rule1 else "activate_r2"))
            if not extra:
                break
            for v, event in extra:
                levels[v] = round_no
                activated_now.append(v)
                if trace is not None:
                    trace.append({"event": event, "machine": v})

        # every edge leaving the conflict set must point outward by now
        for e in ctx.graph.edges:
            inside = (e.u in conflict) + (e.v in conflict)
            if inside == 1:
                tail = e.u if e.u in conflict else e.v
                if orient.head[e.id] != e.other(tail):
                    raise InvariantViolation(
                        f"edge {e.id} leaves the conflict set but is not "
                        "directed outward"
                    )

        result.round_activated.append(activated_now)
        result.round_conflict.append(conflict_now)
        round_no += 1

    return result


def find_push_general(
    ctx: GuessContext,
    placement: dict[str, str],
    result: ExploreResult,
    th: ThresholdsG,
) -> PushMove | None:
    """Any movable one level up whose target stays safely below the push
    ceiling, both on current load and against every father edge unless the
    target is a conflict-set leaf.  Ties break lexicographically."""
    ml = movable_loads(ctx, placement)
    at = movables_by_machine(ctx, placement)
    orient = result.orientation
    best = None
    for u, lvl in result.levels.items():
        for p in at[u]:
            for v in ctx.sorted_eligible(p):
                if v == u or result.levels.get(v) != lvl + 1:
                    continue
                if ctx.dedicated[v] + ml[v] + orient.in_load[v] > th.push_bound:
                    continue
                children = [c for c, x in orient.children(v) if x in result.conflict]
                if children:
                    fathers = [e for e, x in orient.fathers(v) if x in result.conflict]
                    if any(
                        ctx.dedicated[v] + ml[v] + e.weight > th.push_bound
                        for e in fathers
                    ):
                        continue
                key = (u, p.id, v)
                if best is None or key < best:
                    best = key
    if best is None:
        return None
    u, pid, v = best
    return PushMove(pid, u, v)


def _complete_orientation(ctx: GuessContext, orient: Orientation, th: ThresholdsG):
    """Direct the leftover neutral edges, at most one more per machine."""
    extra_in = {v: 0 for v in ctx.machine_ids}

    def assign(edge: EdgeJob, head: str) -> None:
        orient.direct(edge, head)
        extra_in[head] += 1

    for comp in ctx.graph.components():
        neutral = [e for e in comp.edges if orient.neutral(e)]
        if not neutral:
            continue
        remaining = {e.id: e for e in neutral}
        adjacency: dict[str, list[EdgeJob]] = {}
        for e in neutral:
            adjacency.setdefault(e.u, []).append(e)
            adjacency.setdefault(e.v, []).append(e)
        piece_seen: set[str] = set()
        for start in sorted(adjacency, key=ctx.index):
            if start in piece_seen:
                continue
            piece_nodes = [start]
            piece_seen.add(start)
            queue = [start]
            piece_edges = []
            edge_ids = set()
            while queue:
                x = queue.pop()
                for e in adjacency[x]:
                    if e.id not in edge_ids:
                        edge_ids.add(e.id)
                        piece_edges.append(e)
                    y = e.other(x)
                    if y not in piece_seen:
                        piece_seen.add(y)
                        piece_nodes.append(y)
                        queue.append(y)
            if len(piece_edges) == len(piece_nodes):
                for x, e in _cycle_sequence(ctx.graph, piece_nodes, piece_edges):
                    assign(e, e.other(x))
            else:
                with_incoming = [x for x in piece_nodes if orient.in_degree[x] > 0]
                pool = with_incoming or piece_nodes
                root = min(pool, key=ctx.index)
                seen = {root}
                frontier = [root]
                while frontier:
                    x = frontier.pop()
                    for e in adjacency[x]:
                        if e.id in remaining and orient.neutral(e):
                            y = e.other(x)
                            if y not in seen:
                                assign(e, y)
                                seen.add(y)
                                frontier.append(y)

    if any(count > 1 for count in extra_in.values()):
        raise InvariantViolation("a machine received two extra edge jobs")


def run_general(
    ctx: GuessContext, beta: Fraction, trace: list | None = None
) -> tuple[dict[str, str] | Declaration, CoreStats]:
    """Iterate explore + push from a fresh orientation each time."""
    if ctx.mode.value != "general":
        raise RegimeError("general core requires a general-mode context")
    th = ThresholdsG.make(ctx.t, beta)
    placement = initial_placement(ctx)
    stats = CoreStats()
    prev_levels: dict[str, int] | None = None
    prev_potential: int | None = None
    iteration = 0
    while True:
        iteration += 1
        mark = len(trace) if trace is not None else 0
        result = explore(ctx, placement, th, trace=trace)
        if trace is not None:
            for event in trace[mark:]:
                event.setdefault("iteration", iteration)
        if prev_levels is not None:
            check_levels_monotone(prev_levels, result.levels, ctx.machine_ids)
            potential = potential_value(ctx, placement, result.levels)
            if potential >= prev_potential:
                raise InvariantViolation(
                    f"potential did not drop: {prev_potential} -> {potential}"
                )
        if not result.levels:
            assignment = _finish(ctx, result, th, placement)
            stats.makespan = _makespan(ctx, assignment)
            return assignment, stats
        move = find_push_general(ctx, placement, result, th)
        if move is None:
            stats.declared = True
            return _declaration(ctx, placement, result), stats
        placement[move.movable_id] = move.target
        stats.pushes += 1
        check_push_budget(ctx, stats.pushes)
        prev_levels = result.levels
        prev_potential = potential_value(
            ctx, {**placement, move.movable_id: move.source}, result.levels
        )
        stats.potentials.append(prev_potential)
        if trace is not None:
            trace.append(
                {
                    "iteration": iteration,
                    "event": "push",
                    "movable": move.movable_id,
                    "from": move.source,
                    "to": move.target,
                }
            )


def _finish(ctx, result, th, placement) -> dict[str, str]:
    _complete_orientation(ctx, result.orientation, th)
    assignment = dict(placement)
    for e in ctx.graph.edges:
        head = result.orientation.head[e.id]
        assert head is not None
        assignment[e.id] = head
    ml = movable_loads(ctx, placement)
    for v in ctx.machine_ids:
        load = ctx.dedicated[v] + ml[v] + result.orientation.in_load[v]
        if load > th.overload_bound:
            raise InvariantViolation(
                f"machine {v} finished at load {load} above the bound"
            )
    return assignment


def _makespan(ctx, assignment) -> int:
    weights = {p.id: p.weight for p in ctx.movables}
    weights.update({e.id: e.weight for e in ctx.graph.edges})
    loads = dict(ctx.dedicated)
    for job, v in assignment.items():
        loads[v] += weights[job]
    return max(loads.values(), default=0)


def _declaration(ctx, placement, result) -> Declaration:
    ml = movable_loads(ctx, placement)
    activated = sorted(result.levels, key=ctx.index)
    forced = min_edge_load_into(ctx.graph, set(activated))
    payload = {
        **ctx.mode_payload(),
        "activated": activated,
        "levels": dict(sorted(result.levels.items())),
        "conflict": sorted(result.conflict, key=ctx.index),
        "placement": dict(sorted(placement.items())),
        "pl": {v: ml[v] for v in ctx.machine_ids},
        "dedicated": dict(ctx.dedicated),
        "min_edge_load": forced,
    }
    return Declaration(ctx.t, ACTIVATED_SET, payload)
