"""Binary search over the guessed makespan, regime dispatch, and reporting.

The search bracket keeps every guess below the current low end declared
infeasible (or equal to the initial provable lower bound) and the high end
accepted.  Each guess is preprocessed, dispatched to the regime core, and an
accepted assignment is expanded back to the original jobs and re-verified
before it is trusted.
"""

from __future__ import annotations

from dataclasses import dataclass, field
from fractions import Fraction

from .errors import InvariantViolation
from .general import run_general
from .instance import Instance, SolveMode, format_fraction, validate
from .matching import run_matching
from .preprocess import Declaration, GuessContext, reduce_instance
from .relief import run_relief
from .two_valued import run_two_valued
from . import oracle


@dataclass
class Solution:
    assignment: dict[str, str]
    makespan: int
    t_star: int
    lower_bound: int
    ratio_certified: Fraction
    declarations: list[Declaration] = field(default_factory=list)
    mode: SolveMode = SolveMode.AUTO
    beta: Fraction | None = None
    cores_invoked: int = 0
    pushes: int = 0

    def to_json(self) -> dict:
        return {
            "assignment": dict(sorted(self.assignment.items())),
            "makespan": self.makespan,
            "t_star": self.t_star,
            "lower_bound": self.lower_bound,
            "ratio_certified": format_fraction(self.ratio_certified),
        }


def certified_ratio_bound(
    mode: SolveMode,
    beta: Fraction | None = None,
    heavy: int | None = None,
    light: int | None = None,
) -> Fraction:
    """A-priori approximation guarantee for the given mode parameters."""
    if mode == SolveMode.TWO_VALUED:
        if heavy is not None and light is not None and heavy >= 2 * light:
            return 1 + Fraction(heavy // 2, heavy)
        return Fraction(3, 2)
    if mode == SolveMode.GENERAL:
        if beta is None:
            raise ValueError("general mode bound needs beta")
        return Fraction(5, 3) + beta / 3
    raise ValueError("resolve the mode before asking for its bound")


def _dispatch(ctx: GuessContext, trace):
    if ctx.mode == SolveMode.GENERAL:
        return run_general(ctx, ctx.beta, trace=trace)
    heavy, light = ctx.heavy_weight, ctx.light_weight
    if not ctx.movables and not ctx.graph.edges:
        return run_two_valued(ctx, trace=trace)
    if heavy is not None and ctx.t >= 2 * heavy:
        return run_relief(ctx, trace=trace)
    if light is not None and ctx.t < 2 * light:
        return run_matching(ctx)
    variant = "improved" if heavy is not None and heavy >= 2 * light else "standard"
    return run_two_valued(ctx, variant=variant, trace=trace)


def _folded_loads(instance: Instance) -> dict[str, int]:
    loads = {m.id: m.dedicated_load for m in instance.machines}
    for j in instance.jobs:
        if len(j.eligible) == 1:
            (only,) = j.eligible
            loads[only] += j.weight
    return loads


def _greedy_upper(instance: Instance) -> int:
    loads = _folded_loads(instance)
    multi = sorted(
        (j for j in instance.jobs if len(j.eligible) >= 2),
        key=lambda j: (-j.weight, j.id),
    )
    for job in multi:
        best = min(instance.sorted_eligible(job), key=lambda v: loads[v])
        loads[best] += job.weight
    return max(loads.values(), default=0)


def solve(
    instance: Instance,
    mode: SolveMode = SolveMode.AUTO,
    beta: Fraction | None = None,
    trace: list | None = None,
) -> Solution:
    """Find the smallest accepted guess and return its assignment.

    The certified ratio of the result compares the recomputed makespan with
    the strongest proven lower bound (the largest declared guess plus one, or
    the initial bound when nothing was declared).
    """
    report = validate(instance, mode, beta).raise_if_invalid()
    mode = report.mode
    beta = report.beta
    bound = certified_ratio_bound(
        mode, beta, report.heavy_weight, report.light_weight
    )

    folded = _folded_loads(instance)
    machines = max(len(instance.machines), 1)
    lo = max(
        instance.max_weight(),
        max(folded.values(), default=0),
        -(-instance.total_weight() // machines),
    )
    hi = max(lo, _greedy_upper(instance))

    declarations: list[Declaration] = []
    invocations = 0
    pushes = 0

    def attempt(t: int):
        nonlocal invocations, pushes
        invocations += 1
        sub: list | None = [] if trace is not None else None
        reduced = reduce_instance(instance, t, mode, beta)
        if isinstance(reduced, Declaration):
            declarations.append(reduced)
            if trace is not None:
                trace.extend({"t": t, "stage": "reduce", **ev} for ev in reduced.payload.get("log", []))
                trace.append({"t": t, "stage": "search", "outcome": "declared"})
            return None
        if trace is not None:
            trace.extend({"t": t, "stage": "reduce", **ev} for ev in reduced.reductions)
        result, stats = _dispatch(reduced, sub)
        pushes += stats.pushes
        if trace is not None and sub:
            trace.extend({"t": t, "stage": "core", **ev} for ev in sub)
        if isinstance(result, Declaration):
            declarations.append(result)
            if trace is not None:
                trace.append({"t": t, "stage": "search", "outcome": "declared"})
            return None
        full = reduced.expand(result)
        valid, makespan = oracle.verify_solution(instance, full)
        if not valid:
            raise InvariantViolation(f"core produced an invalid assignment at t={t}")
        if Fraction(makespan) > bound * t:
            raise InvariantViolation(
                f"makespan {makespan} exceeds {format_fraction(bound)} * {t}"
            )
        if trace is not None:
            trace.append(
                {"t": t, "stage": "search", "outcome": "accepted", "makespan": makespan}
            )
        return full, makespan

    best = attempt(lo)
    t_star = lo
    if best is None:
        low, high = lo + 1, hi
        cached: tuple[int, tuple] | None = None
        while low < high:
            mid = (low + high) // 2
            outcome = attempt(mid)
            if outcome is not None:
                high = mid
                cached = (mid, outcome)
            else:
                low = mid + 1
        t_star = low
        if cached is not None and cached[0] == t_star:
            best = cached[1]
        else:
            best = attempt(t_star)
            if best is None:
                raise InvariantViolation(
                    f"upper guess t={t_star} was declared infeasible"
                )

    assignment, makespan = best
    lower_bound = lo
    if declarations:
        lower_bound = max(lower_bound, max(d.t for d in declarations) + 1)
    ratio = Fraction(makespan, lower_bound) if lower_bound else Fraction(1)
    return Solution(
        assignment=assignment,
        makespan=makespan,
        t_star=t_star,
        lower_bound=lower_bound,
        ratio_certified=ratio,
        declarations=declarations,
        mode=mode,
        beta=beta,
        cores_invoked=invocations,
        pushes=pushes,
    )
