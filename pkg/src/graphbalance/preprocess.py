"""Per-guess reductions and the edge-job graph.

For a guessed makespan ``t`` the multi-machine jobs split into *edge jobs*
(too heavy for two of them to share a machine, each restricted to exactly two
machines, so they form graph edges) and *movables* (everything else, which
the cores relocate).  This module folds forced jobs into dedicated loads,
rejects structurally impossible guesses with machine-checkable declarations,
and normalizes the edge graph until every component is a tree, a simple
cycle of length at least three, or an isolated node.
"""

from __future__ import annotations

from dataclasses import dataclass, field
from fractions import Fraction

from .errors import RegimeError, ValidationError
from .instance import Instance, JobSpec, MachineSpec, SolveMode, format_fraction

DEDICATED_OVERFLOW = "dedicated_overflow"
MULTI_CYCLE_COMPONENT = "multi_cycle_component"
HALL_VIOLATION = "hall_violation"
ACTIVATED_SET = "activated_set"
PREFLOW_HEIGHT = "preflow_height"

DECLARATION_KINDS = (
    DEDICATED_OVERFLOW,
    MULTI_CYCLE_COMPONENT,
    HALL_VIOLATION,
    ACTIVATED_SET,
    PREFLOW_HEIGHT,
)


@dataclass(frozen=True)
class Declaration:
    """Machine-checkable witness that no assignment of makespan <= t exists."""

    t: int
    kind: str
    payload: dict

    def to_json(self) -> dict:
        return {"t": self.t, "kind": self.kind, "payload": self.payload}

    @staticmethod
    def from_json(doc: dict) -> "Declaration":
        return Declaration(int(doc["t"]), str(doc["kind"]), dict(doc["payload"]))


@dataclass(frozen=True)
class EdgeJob:
    id: str
    u: str
    v: str
    weight: int

    def other(self, node: str) -> str:
        return self.v if node == self.u else self.u

    @property
    def ends(self) -> frozenset[str]:
        return frozenset((self.u, self.v))


@dataclass(frozen=True)
class MovableJob:
    id: str
    weight: int
    eligible: frozenset[str]


@dataclass(frozen=True)
class Component:
    nodes: tuple[str, ...]
    edges: tuple[EdgeJob, ...]
    kind: str  # isolated | tree | cycle | one_cycle | multi_cycle


class EdgeGraph:
    """Multigraph of edge jobs over the machines (node order preserved)."""

    def __init__(self, nodes: tuple[str, ...], edges: tuple[EdgeJob, ...]):
        self.nodes = tuple(nodes)
        self.edges = tuple(edges)
        self._order = {v: i for i, v in enumerate(self.nodes)}
        self._adjacency: dict[str, list[EdgeJob]] = {v: [] for v in self.nodes}
        for e in self.edges:
            self._adjacency[e.u].append(e)
            self._adjacency[e.v].append(e)
        self._components: list[Component] | None = None

    def incident(self, node: str) -> list[EdgeJob]:
        return self._adjacency[node]

    def order(self, node: str) -> int:
        return self._order[node]

    def components(self) -> list[Component]:
        if self._components is None:
            self._components = self._compute_components()
        return self._components

    def component_of(self, node: str) -> Component:
        for comp in self.components():
            if node in comp.nodes:
                return comp
        raise KeyError(node)

    def _compute_components(self) -> list[Component]:
        seen: set[str] = set()
        out = []
        for start in self.nodes:
            if start in seen:
                continue
            stack, nodes, edge_ids, edges = [start], [], set(), []
            seen.add(start)
            while stack:
                v = stack.pop()
                nodes.append(v)
                for e in self._adjacency[v]:
                    if e.id not in edge_ids:
                        edge_ids.add(e.id)
                        edges.append(e)
                    w = e.other(v)
                    if w not in seen:
                        seen.add(w)
                        stack.append(w)
            nodes.sort(key=self._order.__getitem__)
            edges.sort(key=lambda e: e.id)
            n, k = len(nodes), len(edges)
            if k == 0:
                kind = "isolated"
            elif k == n - 1:
                kind = "tree"
            elif k > n:
                kind = "multi_cycle"
            else:
                degrees = {v: 0 for v in nodes}
                for e in edges:
                    degrees[e.u] += 1
                    degrees[e.v] += 1
                kind = "cycle" if all(d == 2 for d in degrees.values()) else "one_cycle"
            out.append(Component(tuple(nodes), tuple(edges), kind))
        return out


def _prune_to_core(graph: EdgeGraph, comp: Component):
    """Strip pendant trees of a one-cycle component, leaf by leaf.

    Returns ``(core_nodes, core_edges, folds)`` where each fold is
    ``(edge, head)`` with the head on the side away from the cycle.
    """
    degree = {v: 0 for v in comp.nodes}
    alive = {e.id: e for e in comp.edges}
    for e in comp.edges:
        degree[e.u] += 1
        degree[e.v] += 1
    incident: dict[str, list[EdgeJob]] = {v: [] for v in comp.nodes}
    for e in comp.edges:
        incident[e.u].append(e)
        incident[e.v].append(e)
    folds: list[tuple[EdgeJob, str]] = []
    while True:
        leaves = sorted(
            (v for v in comp.nodes if degree[v] == 1), key=graph.order
        )
        if not leaves:
            break
        leaf = leaves[0]
        edge = next(e for e in incident[leaf] if e.id in alive)
        folds.append((edge, leaf))
        del alive[edge.id]
        incident[leaf].remove(edge)
        incident[edge.other(leaf)].remove(edge)
        degree[leaf] -= 1
        degree[edge.other(leaf)] -= 1
    core_nodes = tuple(v for v in comp.nodes if degree[v] >= 2)
    core_edges = tuple(sorted(alive.values(), key=lambda e: e.id))
    return core_nodes, core_edges, folds


def _cycle_sequence(graph: EdgeGraph, nodes, edges):
    """Walk a simple cycle: returns ``[(v_i, e_i)]`` with e_i joining
    v_i to v_{i+1 mod k}."""
    incident: dict[str, list[EdgeJob]] = {v: [] for v in nodes}
    for e in edges:
        incident[e.u].append(e)
        incident[e.v].append(e)
    start = min(nodes, key=graph.order)
    seq = []
    used: set[str] = set()
    v = start
    while True:
        nxt = next(
            e for e in sorted(incident[v], key=lambda e: e.id) if e.id not in used
        )
        used.add(nxt.id)
        seq.append((v, nxt))
        v = nxt.other(v)
        if v == start:
            break
    return seq


def _cycle_min_into(graph: EdgeGraph, nodes, edges, subset) -> int:
    # every node of a cycle takes exactly one incoming edge, so the only
    # admissible orientations are the two consistent rotations
    seq = _cycle_sequence(graph, nodes, edges)
    forward = sum(e.weight for v, e in seq if e.other(v) in subset)
    backward = sum(e.weight for v, e in seq if v in subset)
    return min(forward, backward)


def _tree_min_into(nodes, edges, subset) -> int:
    adjacency: dict[str, list[tuple[EdgeJob, str]]] = {v: [] for v in nodes}
    for e in edges:
        adjacency[e.u].append((e, e.v))
        adjacency[e.v].append((e, e.u))

    def visit(v: str, parent_edge: str | None, parent_weight: int):
        # (cost with the parent edge pointing into v, cost with it pointing away)
        child_states = []
        for e, u in adjacency[v]:
            if e.id == parent_edge:
                continue
            child_states.append((e, visit(u, e.id, e.weight)))
        base = sum(into_child for _, (into_child, _) in child_states)
        with_in = base + (parent_weight if v in subset else 0)
        without_in = base
        for e, (into_child, away_from_child) in child_states:
            alt = base - into_child + away_from_child
            if v in subset:
                alt += e.weight
            without_in = min(without_in, alt)
        return with_in, without_in

    return visit(nodes[0], None, 0)[1]


def min_edge_load_into(graph: EdgeGraph, subset) -> int | None:
    """Minimum total edge-job weight any valid orientation sends into *subset*.

    A valid orientation gives every node at most one incoming edge.  Computed
    exactly: rooted two-state DP on trees, the two rotations on cycles, and
    forced pendant folds plus rotations on one-cycle components.  Returns
    ``None`` when some component admits no valid orientation at all.
    """
    subset = set(subset)
    unknown = subset - set(graph.nodes)
    if unknown:
        raise KeyError(f"unknown nodes in subset: {sorted(unknown)}")
    total = 0
    for comp in graph.components():
        if comp.kind == "multi_cycle":
            return None
        if comp.kind == "isolated":
            continue
        if not subset & set(comp.nodes) and comp.kind == "tree":
            continue
        if comp.kind == "tree":
            total += _tree_min_into(comp.nodes, comp.edges, subset)
        elif comp.kind == "cycle":
            total += _cycle_min_into(graph, comp.nodes, comp.edges, subset)
        else:  # one_cycle: pendant edges are forced outward, core rotates
            core_nodes, core_edges, folds = _prune_to_core(graph, comp)
            total += sum(e.weight for e, head in folds if head in subset)
            total += _cycle_min_into(graph, core_nodes, core_edges, subset)
    return total


# ---------------------------------------------------------------------------
# Guess context
# ---------------------------------------------------------------------------


@dataclass(frozen=True)
class TwinFold:
    """Record of a parallel edge pair replaced by one movable.

    The heavier edge job follows the surviving movable; the lighter one takes
    the opposite endpoint.  With equal weights no movable survives and the
    split is fixed as heavy->u, light->v.
    """

    movable_id: str | None
    heavy_edge: str
    light_edge: str
    u: str
    v: str


@dataclass(frozen=True)
class GuessContext:
    """Everything the cores need for one guessed makespan."""

    instance: Instance
    t: int
    mode: SolveMode
    beta: Fraction | None
    heavy_weight: int | None
    light_weight: int | None
    dedicated: dict[str, int]
    movables: tuple[MovableJob, ...]
    graph: EdgeGraph
    reductions: tuple[dict, ...]
    forced: tuple[tuple[str, str], ...]
    twins: tuple[TwinFold, ...] = field(default=())

    @property
    def machine_ids(self) -> list[str]:
        return self.instance.machine_ids

    def index(self, machine: str) -> int:
        return self.instance.machine_index[machine]

    def sorted_eligible(self, movable: MovableJob) -> list[str]:
        return sorted(movable.eligible, key=self.instance.machine_index.__getitem__)

    def synthetic_ids(self) -> set[str]:
        return {tw.movable_id for tw in self.twins if tw.movable_id is not None}

    def expand(self, core_assignment: dict[str, str]) -> dict[str, str]:
        """Translate a reduced-instance assignment back to the original jobs."""
        synthetic = self.synthetic_ids()
        full = {
            job: machine
            for job, machine in core_assignment.items()
            if job not in synthetic
        }
        for tw in self.twins:
            if tw.movable_id is None:
                full[tw.heavy_edge] = tw.u
                full[tw.light_edge] = tw.v
            else:
                spot = core_assignment[tw.movable_id]
                other = tw.v if spot == tw.u else tw.u
                full[tw.heavy_edge] = spot
                full[tw.light_edge] = other
        for job, machine in self.forced:
            full[job] = machine
        return full

    def to_instance(self) -> Instance:
        """Reduced state as a standalone instance (for equivalence checks)."""
        machines = tuple(
            MachineSpec(v, self.dedicated[v]) for v in self.machine_ids
        )
        jobs = [JobSpec(p.id, p.weight, p.eligible) for p in self.movables]
        jobs += [
            JobSpec(e.id, e.weight, frozenset((e.u, e.v))) for e in self.graph.edges
        ]
        hint = self.mode if self.mode != SolveMode.AUTO else SolveMode.AUTO
        return Instance(machines, tuple(jobs), hint)

    def mode_payload(self) -> dict:
        payload: dict = {"mode": self.mode.value}
        if self.beta is not None:
            payload["beta"] = format_fraction(self.beta)
        if self.heavy_weight is not None:
            payload["W"] = self.heavy_weight
        if self.light_weight is not None:
            payload["w"] = self.light_weight
        return payload


def classify_jobs(
    instance: Instance, t: int, mode: SolveMode, beta: Fraction | None = None
) -> tuple[list[EdgeJob], list[MovableJob]]:
    """Split the multi-machine jobs into edge jobs and movables at guess t.

    Two-valued: a job is an edge job iff its weight is the heavy value and
    exceeds t/2.  General: iff its weight exceeds beta*t.  Single-machine
    jobs are ignored here; fold them first.
    """
    multi = [j for j in instance.jobs if len(j.eligible) >= 2]
    if mode == SolveMode.TWO_VALUED:
        heavy = max((j.weight for j in multi), default=0)

        def is_edge(job: JobSpec) -> bool:
            return 2 * job.weight > t and job.weight == heavy

    elif mode == SolveMode.GENERAL:
        if beta is None:
            raise ValidationError(["general mode requires beta"])

        def is_edge(job: JobSpec) -> bool:
            return Fraction(job.weight) > beta * t

    else:
        raise ValueError("classification requires a resolved mode")

    edge_jobs, movables = [], []
    for job in multi:
        if is_edge(job):
            if len(job.eligible) != 2:
                raise ValidationError(
                    [
                        f"job {job.id!r} is heavy at t={t} but eligible on "
                        f"{len(job.eligible)} machines"
                    ]
                )
            u, v = instance.sorted_eligible(job)
            edge_jobs.append(EdgeJob(job.id, u, v, job.weight))
        else:
            movables.append(MovableJob(job.id, job.weight, job.eligible))
    return edge_jobs, movables


def reduce_instance(
    instance: Instance, t: int, mode: SolveMode, beta: Fraction | None = None
) -> GuessContext | Declaration:
    """Apply all guess-t reductions, or declare the guess impossible.

    In order: fold single-machine jobs, check dedicated loads against t,
    classify, reject components with two or more cycles, fold pendant trees
    of one-cycle components, replace parallel edge pairs by a movable of the
    weight difference, and repeat to a fixpoint.  The log records each step.
    """
    if mode == SolveMode.AUTO:
        raise ValueError("reduce requires a resolved mode (two_valued or general)")
    if t < instance.max_weight():
        raise RegimeError(
            f"guess t={t} is below the maximum job weight {instance.max_weight()}"
        )

    multi_weights = sorted(
        {j.weight for j in instance.jobs if len(j.eligible) >= 2}
    )
    heavy_weight = light_weight = None
    if mode == SolveMode.TWO_VALUED and multi_weights:
        heavy_weight = multi_weights[-1]
        light_weight = multi_weights[0]

    dedicated = {m.id: m.dedicated_load for m in instance.machines}
    log: list[dict] = []
    forced: list[tuple[str, str]] = []
    twins: list[TwinFold] = []

    for job in instance.jobs:
        if len(job.eligible) == 1:
            (only,) = job.eligible
            dedicated[only] += job.weight
            forced.append((job.id, only))
            log.append(
                {"op": "fold_single", "job": job.id, "machine": only, "weight": job.weight}
            )

    def mode_payload() -> dict:
        payload: dict = {"mode": mode.value}
        if beta is not None:
            payload["beta"] = format_fraction(beta)
        if heavy_weight is not None:
            payload["W"] = heavy_weight
            payload["w"] = light_weight
        return payload

    def overflow() -> Declaration | None:
        for v in instance.machine_ids:
            if dedicated[v] > t:
                log.append({"op": "declare", "kind": DEDICATED_OVERFLOW, "machine": v})
                return Declaration(
                    t,
                    DEDICATED_OVERFLOW,
                    {"machine": v, "dedicated": dedicated[v], **mode_payload()},
                )
        return None

    decl = overflow()
    if decl:
        return decl

    edge_jobs, movables = classify_jobs(instance, t, mode, beta)

    while True:
        graph = EdgeGraph(tuple(instance.machine_ids), tuple(edge_jobs))
        changed = False
        for comp in graph.components():
            if comp.kind == "multi_cycle":
                log.append(
                    {
                        "op": "declare",
                        "kind": MULTI_CYCLE_COMPONENT,
                        "nodes": list(comp.nodes),
                    }
                )
                return Declaration(
                    t,
                    MULTI_CYCLE_COMPONENT,
                    {
                        "nodes": list(comp.nodes),
                        "edges": [e.id for e in comp.edges],
                        **mode_payload(),
                    },
                )
            if comp.kind == "one_cycle":
                _, _, folds = _prune_to_core(graph, comp)
                dropped = set()
                for edge, head in folds:
                    dedicated[head] += edge.weight
                    forced.append((edge.id, head))
                    dropped.add(edge.id)
                    log.append(
                        {
                            "op": "fold_forced_edge",
                            "edge": edge.id,
                            "machine": head,
                            "weight": edge.weight,
                        }
                    )
                edge_jobs = [e for e in edge_jobs if e.id not in dropped]
                changed = True
        if changed:
            decl = overflow()
            if decl:
                return decl
            graph = EdgeGraph(tuple(instance.machine_ids), tuple(edge_jobs))

        by_pair: dict[frozenset[str], list[EdgeJob]] = {}
        for e in edge_jobs:
            by_pair.setdefault(e.ends, []).append(e)
        doubled = False
        for pair, bucket in sorted(
            by_pair.items(), key=lambda kv: tuple(sorted(map(graph.order, kv[0])))
        ):
            if len(bucket) < 2:
                continue
            assert len(bucket) == 2, "3+ parallel edges imply a multi-cycle component"
            first, second = sorted(bucket, key=lambda e: (-e.weight, e.id))
            u, v = sorted(pair, key=graph.order)
            dedicated[u] += second.weight
            dedicated[v] += second.weight
            diff = first.weight - second.weight
            if diff > 0:
                pid = f"~{first.id}+{second.id}"
                movables.append(MovableJob(pid, diff, frozenset((u, v))))
                twins.append(TwinFold(pid, first.id, second.id, u, v))
            else:
                twins.append(TwinFold(None, first.id, second.id, u, v))
            log.append(
                {
                    "op": "fold_parallel_pair",
                    "edges": [first.id, second.id],
                    "nodes": [u, v],
                    "folded_weight": second.weight,
                    "movable": f"~{first.id}+{second.id}" if diff > 0 else None,
                }
            )
            dropped = {first.id, second.id}
            edge_jobs = [e for e in edge_jobs if e.id not in dropped]
            doubled = True
        if doubled:
            decl = overflow()
            if decl:
                return decl
        if not changed and not doubled:
            break

    graph = EdgeGraph(tuple(instance.machine_ids), tuple(edge_jobs))
    for comp in graph.components():
        assert comp.kind in ("isolated", "tree", "cycle")
        assert comp.kind != "cycle" or len(comp.nodes) >= 3
    assert all(len(p.eligible) >= 2 for p in movables)

    return GuessContext(
        instance=instance,
        t=t,
        mode=mode,
        beta=beta,
        heavy_weight=heavy_weight,
        light_weight=light_weight,
        dedicated=dedicated,
        movables=tuple(movables),
        graph=graph,
        reductions=tuple(log),
        forced=tuple(forced),
        twins=tuple(twins),
    )
