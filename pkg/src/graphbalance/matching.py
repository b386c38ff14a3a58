"""Exact core for guesses where no machine can hold two multi-machine jobs.

When any two remaining job weights sum to more than t, an assignment of
makespan <= t is exactly a perfect matching of jobs to machines that fit
them.  Augmenting-path matching decides this; if some job stays unmatched,
the jobs reachable along alternating paths form a neighborhood-deficient set,
which is the infeasibility witness.
"""

from __future__ import annotations

from .errors import RegimeError
from .preprocess import Declaration, GuessContext, HALL_VIOLATION
from .push import CoreStats


def _unit_items(ctx: GuessContext):
    items = [(p.id, p.weight, ctx.sorted_eligible(p)) for p in ctx.movables]
    for e in ctx.graph.edges:
        ends = sorted((e.u, e.v), key=ctx.index)
        items.append((e.id, e.weight, ends))
    items.sort(key=lambda item: item[0])
    return items


def run_matching(ctx: GuessContext) -> tuple[dict[str, str] | Declaration, CoreStats]:
    """Match every job to a fitting machine, or return a deficiency witness.

    Precondition (checked): the two smallest job weights exceed t together,
    so a machine can take at most one job on top of its dedicated load.
    """
    t = ctx.t
    items = _unit_items(ctx)
    weights = sorted(w for _, w, _ in items)
    if len(weights) >= 2 and weights[0] + weights[1] <= t:
        raise RegimeError(
            "unit-capacity core requires any two job weights to exceed "
            f"t={t}, but {weights[0]} + {weights[1]} <= t"
        )

    fits: dict[str, list[str]] = {
        jid: [v for v in eligible if ctx.dedicated[v] + w <= t]
        for jid, w, eligible in items
    }
    matched_job: dict[str, str] = {}
    matched_machine: dict[str, str] = {}

    def augment(jid: str, seen: set[str]) -> bool:
        for v in fits[jid]:
            if v in seen:
                continue
            seen.add(v)
            holder = matched_machine.get(v)
            if holder is None or augment(holder, seen):
                matched_job[jid] = v
                matched_machine[v] = jid
                return True
        return False

    unmatched = None
    for jid, _, _ in items:
        if not augment(jid, set()):
            unmatched = jid
            break

    if unmatched is None:
        loads = dict(ctx.dedicated)
        for jid, w, _ in items:
            loads[matched_job[jid]] += w
        assert max(loads.values(), default=0) <= t
        return dict(matched_job), CoreStats(makespan=max(loads.values(), default=0))

    # Alternating BFS from the unmatched job: every reachable machine is
    # matched, so the reachable jobs outnumber their joint neighborhood.
    witness_jobs = {unmatched}
    neighborhood: set[str] = set()
    frontier = [unmatched]
    while frontier:
        jid = frontier.pop()
        for v in fits[jid]:
            if v in neighborhood:
                continue
            neighborhood.add(v)
            holder = matched_machine.get(v)
            assert holder is not None, "free machine reachable: matching not maximal"
            if holder not in witness_jobs:
                witness_jobs.add(holder)
                frontier.append(holder)
    assert len(neighborhood) < len(witness_jobs)
    payload = {
        "jobs": sorted(witness_jobs),
        "neighborhood": sorted(neighborhood),
        **ctx.mode_payload(),
    }
    return Declaration(t, HALL_VIOLATION, payload), CoreStats(declared=True)
