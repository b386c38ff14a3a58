"""Relief core: preflow-push redistribution with a t+W-1 makespan target.

Used by the two-valued driver once the guess is at least twice the heavy
weight (then no edge jobs remain), and usable as a generic fallback for any
reduced context.  Starting from the lowest-indexed eligible machine for every
job, overloaded machines (load > t+W-1 where W is the largest remaining job
weight) push single jobs downhill in a height labeling, relabeling when
stuck.  A machine climbing to twice the machine count triggers the
infeasibility path: preferably a height-gap cut, otherwise an exact max-flow
recount that either yields a sound cut certificate or proves the guess
fractionally feasible, in which case the flow is rounded into an assignment
within the same makespan target.
"""

from __future__ import annotations

from .errors import InvariantViolation
from .preprocess import Declaration, GuessContext, PREFLOW_HEIGHT
from .push import CoreStats


def _items(ctx: GuessContext):
    out = [(p.id, p.weight, ctx.sorted_eligible(p)) for p in ctx.movables]
    for e in ctx.graph.edges:
        out.append((e.id, e.weight, sorted((e.u, e.v), key=ctx.index)))
    out.sort(key=lambda item: item[0])
    return out


def run_relief(
    ctx: GuessContext, trace: list | None = None
) -> tuple[dict[str, str] | Declaration, CoreStats]:
    t = ctx.t
    machines = ctx.machine_ids
    items = _items(ctx)
    stats = CoreStats()
    if not items:
        assert max(ctx.dedicated.values(), default=0) <= t
        stats.makespan = max(ctx.dedicated.values(), default=0)
        return {}, stats

    w_top = max(w for _, w, _ in items)
    cap = t + w_top - 1
    eligible = {jid: elig for jid, _, elig in items}
    weight = {jid: w for jid, w, _ in items}

    assignment = {jid: elig[0] for jid, _, elig in items}
    loads = dict(ctx.dedicated)
    on_machine: dict[str, list[str]] = {v: [] for v in machines}
    for jid, _, elig in items:
        loads[elig[0]] += weight[jid]
        on_machine[elig[0]].append(jid)

    height = {v: 0 for v in machines}
    height_cap = 2 * len(machines)
    budget = 4 * len(machines) ** 2 * len(items)
    ops = 0

    def overloaded() -> list[str]:
        return [v for v in machines if loads[v] > cap]

    stuck = False
    while True:
        heavy_machines = overloaded()
        if not heavy_machines:
            break
        v = max(heavy_machines, key=lambda x: (height[x], -ctx.index(x)))
        move = None
        for jid in sorted(on_machine[v]):
            for u in eligible[jid]:
                if height[u] < height[v] and loads[u] + weight[jid] <= cap:
                    move = (jid, u)
                    break
            if move:
                break
        ops += 1
        if ops > budget:
            raise InvariantViolation(
                f"relief core exceeded its operation budget of {budget}"
            )
        if move:
            jid, u = move
            on_machine[v].remove(jid)
            on_machine[u].append(jid)
            loads[v] -= weight[jid]
            loads[u] += weight[jid]
            assignment[jid] = u
            stats.pushes += 1
            if trace is not None:
                trace.append({"event": "push", "job": jid, "from": v, "to": u})
        else:
            height[v] += 1
            if trace is not None:
                trace.append({"event": "relabel", "machine": v, "height": height[v]})
            if height[v] >= height_cap:
                stuck = True
                break

    if not stuck:
        makespan = max(loads.values(), default=0)
        assert makespan <= cap
        stats.makespan = makespan
        return assignment, stats

    cut = _height_gap_cut(ctx, t, height, on_machine, eligible, loads, height_cap)
    if cut is not None:
        stats.declared = True
        return (
            Declaration(
                t,
                PREFLOW_HEIGHT,
                {
                    "cut": cut[0],
                    "captive_jobs": cut[1],
                    "heights": dict(height),
                    **ctx.mode_payload(),
                },
            ),
            stats,
        )

    feasible, result = _flow_check(ctx, t, items)
    if not feasible:
        cut_machines, captive = result
        stats.declared = True
        return (
            Declaration(
                t,
                PREFLOW_HEIGHT,
                {
                    "cut": cut_machines,
                    "captive_jobs": captive,
                    "heights": dict(height),
                    **ctx.mode_payload(),
                },
            ),
            stats,
        )
    assignment = _round_flow(ctx, t, items, result)
    loads = dict(ctx.dedicated)
    for jid, v in assignment.items():
        loads[v] += weight[jid]
    makespan = max(loads.values(), default=0)
    assert makespan <= cap
    stats.makespan = makespan
    return assignment, stats


def _height_gap_cut(ctx, t, height, on_machine, eligible, loads, height_cap):
    """Try every empty height level as a cut threshold, highest first.

    A valid cut S must trap its jobs (eligibility stays inside S) and carry
    total load above |S|*t; both are rechecked here before use.
    """
    occupied = set(height.values())
    for gap in range(height_cap - 1, 0, -1):
        if gap in occupied:
            continue
        cut = [v for v in ctx.machine_ids if height[v] > gap]
        if not cut:
            continue
        cut_set = set(cut)
        captive = sorted(jid for v in cut for jid in on_machine[v])
        if any(not set(eligible[jid]) <= cut_set for jid in captive):
            continue
        if sum(loads[v] for v in cut) > len(cut) * t:
            return cut, captive
    return None


# ---------------------------------------------------------------------------
# Exact fractional recount (max-flow) and rounding
# ---------------------------------------------------------------------------


class _Dinic:
    def __init__(self, n: int):
        self.n = n
        self.adj: list[list[list[int]]] = [[] for _ in range(n)]  # [to, cap, rev]

    def add(self, u: int, v: int, cap: int) -> None:
        self.adj[u].append([v, cap, len(self.adj[v])])
        self.adj[v].append([u, 0, len(self.adj[u]) - 1])

    def max_flow(self, s: int, tt: int) -> int:
        flow = 0
        while True:
            level = [-1] * self.n
            level[s] = 0
            queue = [s]
            for u in queue:
                for arc in self.adj[u]:
                    if arc[1] > 0 and level[arc[0]] < 0:
                        level[arc[0]] = level[u] + 1
                        queue.append(arc[0])
            if level[tt] < 0:
                return flow
            it = [0] * self.n

            def dfs(u: int, pushed: int) -> int:
                if u == tt:
                    return pushed
                while it[u] < len(self.adj[u]):
                    arc = self.adj[u][it[u]]
                    v, cap_arc, rev = arc
                    if cap_arc > 0 and level[v] == level[u] + 1:
                        got = dfs(v, min(pushed, cap_arc))
                        if got:
                            arc[1] -= got
                            self.adj[v][rev][1] += got
                            return got
                    it[u] += 1
                return 0

            while True:
                got = dfs(s, 1 << 62)
                if not got:
                    break
                flow += got

    def reachable(self, s: int) -> set[int]:
        seen = {s}
        stack = [s]
        while stack:
            u = stack.pop()
            for v, cap_arc, _ in self.adj[u]:
                if cap_arc > 0 and v not in seen:
                    seen.add(v)
                    stack.append(v)
        return seen


def _flow_check(ctx: GuessContext, t: int, items):
    """Fractional feasibility at t by integral max-flow.

    Returns ``(True, units)`` with ``units[(job, machine)]`` the integral flow
    split, or ``(False, (cut_machines, captive_jobs))`` where the residual cut
    gives machines whose captive jobs provably overfill them.
    """
    machines = ctx.machine_ids
    job_ids = [jid for jid, _, _ in items]
    total = sum(w for _, w, _ in items)
    n = 2 + len(job_ids) + len(machines)
    source, sink = 0, n - 1
    job_node = {jid: 1 + i for i, jid in enumerate(job_ids)}
    machine_node = {v: 1 + len(job_ids) + i for i, v in enumerate(machines)}
    net = _Dinic(n)
    unconstrained = total + 1
    for jid, w, elig in items:
        net.add(source, job_node[jid], w)
        for v in elig:
            net.add(job_node[jid], machine_node[v], unconstrained)
    for v in machines:
        net.add(machine_node[v], sink, max(t - ctx.dedicated[v], 0))
    value = net.max_flow(source, sink)
    if value < total:
        reach = net.reachable(source)
        cut_machines = sorted(
            (v for v in machines if machine_node[v] in reach), key=ctx.index
        )
        captive = sorted(jid for jid in job_ids if job_node[jid] in reach)
        return False, (cut_machines, captive)
    node_to_machine = {node: mid for mid, node in machine_node.items()}
    units: dict[tuple[str, str], int] = {}
    for jid in job_ids:
        for v, cap_arc, _ in net.adj[job_node[jid]]:
            mid = node_to_machine.get(v)
            if mid is not None:
                sent = unconstrained - cap_arc
                if sent > 0:
                    units[(jid, mid)] = sent
    return True, units


def _round_flow(ctx: GuessContext, t: int, items, units) -> dict[str, str]:
    """Round an integral fractional split into a whole assignment.

    Cancels cycles in the bipartite support graph (loads unchanged), then in
    the remaining forest matches every split job to a child machine, which
    holds at least one unit of it.  That machine gains at most weight-1 beyond
    its fractional load.
    """
    weight = {jid: w for jid, w, _ in items}
    split: dict[str, dict[str, int]] = {}
    assignment: dict[str, str] = {}
    for (jid, v), amount in units.items():
        split.setdefault(jid, {})[v] = amount
    for jid, shares in list(split.items()):
        if len(shares) == 1:
            (v,) = shares
            assignment[jid] = v
            del split[jid]

    def find_cycle():
        # prune to the 2-core of the bipartite support graph, then walk it
        adjacency: dict[tuple, set[tuple]] = {}
        for jid, shares in split.items():
            for v in shares:
                adjacency.setdefault(("j", jid), set()).add(("m", v))
                adjacency.setdefault(("m", v), set()).add(("j", jid))
        queue = [nd for nd, nbrs in adjacency.items() if len(nbrs) <= 1]
        while queue:
            nd = queue.pop()
            if nd not in adjacency:
                continue
            for nb in adjacency.pop(nd):
                adjacency[nb].discard(nd)
                if len(adjacency[nb]) == 1:
                    queue.append(nb)
        adjacency = {nd: nbrs for nd, nbrs in adjacency.items() if nbrs}
        if not adjacency:
            return None
        start = min(adjacency, key=str)
        walk = [start]
        position = {start: 0}
        prev = None
        while True:
            cur = walk[-1]
            nxt = min((nb for nb in adjacency[cur] if nb != prev), key=str)
            if nxt in position:
                return walk[position[nxt]:]
            position[nxt] = len(walk)
            walk.append(nxt)
            prev = cur

    while True:
        cycle = find_cycle()
        if cycle is None:
            break
        pairs = []
        for i, node in enumerate(cycle):
            nxt = cycle[(i + 1) % len(cycle)]
            jid = node[1] if node[0] == "j" else nxt[1]
            mid = nxt[1] if nxt[0] == "m" else node[1]
            pairs.append(((jid, mid), i % 2 == 0))
        delta = min(split[j][m] for (j, m), minus in pairs if minus)
        for (j, m), minus in pairs:
            split[j][m] += -delta if minus else delta
            if split[j][m] == 0:
                del split[j][m]
        for jid, shares in list(split.items()):
            if len(shares) == 1:
                (v,) = shares
                assignment[jid] = v
                del split[jid]

    # Forest: root every component at a machine; each split job then has at
    # least one child machine holding >= 1 unit of it.
    adjacency: dict[tuple, list[tuple]] = {}
    for jid, shares in split.items():
        for v in shares:
            adjacency.setdefault(("j", jid), []).append(("m", v))
            adjacency.setdefault(("m", v), []).append(("j", jid))
    visited: set[tuple] = set()
    for start in sorted(adjacency, key=lambda nd: (nd[0] != "m", str(nd[1]))):
        if start in visited or start[0] != "m":
            continue
        order = [(start, None)]
        visited.add(start)
        head = 0
        while head < len(order):
            node, parent_node = order[head]
            head += 1
            if node[0] == "j":
                children = [c for c in adjacency[node] if c != parent_node]
                assert children, "split job with no child machine in support forest"
                assignment[node[1]] = min(children, key=lambda c: ctx.index(c[1]))[1]
            for nxt in adjacency[node]:
                if nxt not in visited:
                    visited.add(nxt)
                    order.append((nxt, node))

    assert set(assignment) == {jid for jid, _, _ in items}
    return assignment
