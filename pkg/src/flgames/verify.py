"""Falsification engine.

Searches for counterexamples to the properties the mechanisms are
supposed to have: profitable misreports (unilateral and coalitional),
anonymity violations, and approximation ratios above the proven bounds.
A clean pass is evidence over the searched set, never a proof; a
returned witness is an exact, replayable counterexample.

Scan order is fixed so witnesses are reproducible: agents ascending,
misreports ascending, coalitions by size then lexicographic agent
indices, joint misreports in product order with the last member's
report varying fastest.
"""

from __future__ import annotations

import itertools
import random
from dataclasses import dataclass
from fractions import Fraction
from typing import Optional

from .core import (
    Instance,
    Line,
    Outcome,
    outcome_agent_cost,
    outcome_cost,
    permute_agents,
    validate_objective,
)
from .instances import (
    SINGLE_LB_BASE,
    SINGLE_LB_SHIFTED,
    TWO_LB_BASE,
    TWO_LB_SHIFTED,
    PaperConstruction,
    RandomFamily,
    build_paper_instance,
    random_instance,
)
from .solver import DEFAULT_GUARD, GuardExceeded, Ratio, optimal, ratio_of

DEFAULT_GRID_POINTS = 41


def _with_agents(template: Instance, agents: tuple) -> Instance:
    # Hot path: every report comes from a validated misreport set, so
    # skip Instance.__post_init__ revalidation.
    inst = object.__new__(Instance)
    object.__setattr__(inst, "space", template.space)
    object.__setattr__(inst, "agents", agents)
    object.__setattr__(inst, "candidates", template.candidates)
    object.__setattr__(inst, "k", template.k)
    return inst


# ---------------------------------------------------------------------------
# misreport sets


@dataclass(frozen=True)
class MisreportSet:
    """The finite set of reports tried for each agent, ascending.

    On the line: every candidate location, every true agent location,
    and a uniform grid of grid_points points spanning the instance's
    location range widened by one range-width on each side (at least 1).
    In a finite metric space: every point.  The same set serves every
    agent; an agent's own true location is skipped during search.
    """

    points: tuple
    grid_points: int

    @property
    def size(self) -> int:
        return len(self.points)

    def for_agent(self, i: int) -> tuple:
        return self.points


def misreport_set(instance: Instance, grid_points: int = DEFAULT_GRID_POINTS) -> MisreportSet:
    if grid_points < 0:
        raise ValueError(f"grid_points must be nonnegative, got {grid_points}")
    if not isinstance(instance.space, Line):
        return MisreportSet(tuple(range(1, instance.space.size + 1)), grid_points)
    locations = instance.agents + instance.candidates
    lo, hi = min(locations), max(locations)
    span = max(hi - lo, Fraction(1))
    points = set(locations)
    if grid_points == 1:
        points.add(lo - span)
    elif grid_points > 1:
        start = lo - span
        step = (hi + span - start) / (grid_points - 1)
        points.update(start + t * step for t in range(grid_points))
    return MisreportSet(tuple(sorted(points)), grid_points)


# ---------------------------------------------------------------------------
# deviation search


@dataclass(frozen=True)
class DeviationWitness:
    """A replayable profitable deviation: every coalition member's cost,
    measured at its true location, strictly drops."""

    coalition: tuple[int, ...]
    misreports: tuple
    outcome_before: Outcome
    outcome_after: Outcome
    costs_before: tuple[Fraction, ...]
    costs_after: tuple[Fraction, ...]


def find_unilateral_deviation(
    instance: Instance,
    mechanism,
    misreports: Optional[MisreportSet] = None,
    grid_points: int = DEFAULT_GRID_POINTS,
) -> Optional[DeviationWitness]:
    """First strictly profitable single-agent misreport in scan order,
    or None.  Randomized mechanisms are compared in expectation."""
    if misreports is None:
        misreports = misreport_set(instance, grid_points)
    truthful = mechanism.apply(instance)
    agents = instance.agents
    for i in range(1, instance.n + 1):
        base_cost = outcome_agent_cost(instance, truthful, i)
        if base_cost == 0:
            continue
        true_location = agents[i - 1]
        prefix, suffix = agents[: i - 1], agents[i:]
        for report in misreports.for_agent(i):
            if report == true_location:
                continue
            shifted = mechanism.apply(_with_agents(instance, prefix + (report,) + suffix))
            if shifted == truthful:
                continue
            new_cost = outcome_agent_cost(instance, shifted, i)
            if new_cost < base_cost:
                return DeviationWitness(
                    (i,), (report,), truthful, shifted, (base_cost,), (new_cost,)
                )
    return None


def misreport_options(instance: Instance, misreports: MisreportSet) -> list[tuple]:
    """Per-agent reports actually tried: the set minus the agent's own
    true location."""
    return [
        tuple(r for r in misreports.for_agent(i) if r != instance.agents[i - 1])
        for i in range(1, instance.n + 1)
    ]


def joint_misreport_count(instance: Instance, misreports: MisreportSet, max_coalition: int) -> int:
    """Total joint reports a group search will try (its guard budget)."""
    options = misreport_options(instance, misreports)
    total = 0
    for size in range(1, max_coalition + 1):
        for coalition in itertools.combinations(range(1, instance.n + 1), size):
            combos = 1
            for i in coalition:
                combos *= len(options[i - 1])
            total += combos
    return total


def find_group_deviation(
    instance: Instance,
    mechanism,
    misreports: Optional[MisreportSet] = None,
    max_coalition: int = 1,
    grid_points: int = DEFAULT_GRID_POINTS,
    guard: int = DEFAULT_GUARD,
) -> Optional[DeviationWitness]:
    """First coalition (size <= max_coalition) whose joint misreport
    strictly improves every member, or None.

    Members reporting truthfully are not enumerated: a witness with an
    idle member implies a smaller-coalition witness, which the
    size-ascending scan finds first.  Raises GuardExceeded if the total
    number of joint reports to try exceeds the guard.
    """
    if not 1 <= max_coalition <= instance.n:
        raise ValueError(f"max_coalition must be in 1..{instance.n}, got {max_coalition}")
    if misreports is None:
        misreports = misreport_set(instance, grid_points)
    agents = instance.agents
    options = misreport_options(instance, misreports)
    total = joint_misreport_count(instance, misreports, max_coalition)
    if total > guard:
        raise GuardExceeded(f"{total} joint misreports exceed the guard of {guard}")
    truthful = mechanism.apply(instance)
    base_costs = [outcome_agent_cost(instance, truthful, i) for i in range(1, instance.n + 1)]
    agent_list = list(agents)
    for size in range(1, max_coalition + 1):
        for coalition in itertools.combinations(range(1, instance.n + 1), size):
            members_base = tuple(base_costs[i - 1] for i in coalition)
            # an agent already at cost 0 can never strictly improve
            if any(cost == 0 for cost in members_base):
                continue
            for joint in itertools.product(*(options[i - 1] for i in coalition)):
                profile = agent_list[:]
                for i, report in zip(coalition, joint):
                    profile[i - 1] = report
                shifted = mechanism.apply(_with_agents(instance, tuple(profile)))
                if shifted == truthful:
                    continue
                new_costs = tuple(
                    outcome_agent_cost(instance, shifted, i) for i in coalition
                )
                if all(new < old for new, old in zip(new_costs, members_base)):
                    return DeviationWitness(
                        coalition, joint, truthful, shifted, members_base, new_costs
                    )
    return None


# ---------------------------------------------------------------------------
# anonymity


def check_anonymity(
    instance: Instance, mechanism, trials: int = 200, seed: int = 0
) -> Optional[tuple[int, ...]]:
    """Permutation of the agent profile that changes the outcome, or None.

    Exhaustive over all n! permutations for n <= 6, otherwise `trials`
    seeded random permutations.
    """
    truthful = mechanism.apply(instance)
    n = instance.n
    if n <= 6:
        perms = itertools.permutations(range(1, n + 1))
    else:
        rng = random.Random(f"anonymity:{seed}")
        perms = (tuple(rng.sample(range(1, n + 1), n)) for _ in range(trials))
    identity = tuple(range(1, n + 1))
    for perm in perms:
        if perm == identity:
            continue
        if mechanism.apply(permute_agents(instance, perm)) != truthful:
            return perm
    return None


# ---------------------------------------------------------------------------
# ratio sweeps


@dataclass(frozen=True)
class SweepRow:
    index: int
    instance: Instance
    mechanism_cost: Fraction
    optimal_cost: Fraction
    ratio: Ratio


HISTOGRAM_EDGES = (
    Fraction(1),
    Fraction(5, 4),
    Fraction(3, 2),
    Fraction(7, 4),
    Fraction(2),
    Fraction(5, 2),
    Fraction(3),
)

HISTOGRAM_LABELS = (
    "<1",
    "[1,5/4)",
    "[5/4,3/2)",
    "[3/2,7/4)",
    "[7/4,2)",
    "[2,5/2)",
    "[5/2,3)",
    "[3,inf)",
    "inf",
)


def _bucket(value: Ratio) -> str:
    if not isinstance(value, Fraction):
        return "inf"
    if value < 1:
        return "<1"
    for edge, label in zip(HISTOGRAM_EDGES[1:], HISTOGRAM_LABELS[1:-2]):
        if value < edge:
            return label
    return "[3,inf)"


@dataclass(frozen=True)
class RatioReport:
    """Aggregate of a sweep: worst ratio seen, where, and the spread."""

    mechanism: str
    objective: str
    count: int
    max_ratio: Optional[Ratio]
    argmax_index: Optional[int]
    argmax_instance: Optional[Instance]
    histogram: tuple[tuple[str, int], ...]


def iter_sweep(
    family: RandomFamily,
    mechanism,
    objective: str,
    count: int,
    guard: int = DEFAULT_GUARD,
):
    """Generate, run, and solve `count` instances of a family, yielding
    one SweepRow per instance."""
    validate_objective(objective)
    for index in range(count):
        inst = random_instance(family, index)
        cost = outcome_cost(inst, mechanism.apply(inst), objective)
        opt = optimal(inst, objective, guard).value
        yield SweepRow(index, inst, cost, opt, ratio_of(cost, opt))


def sweep(
    family: RandomFamily,
    mechanism,
    objective: str,
    count: int,
    guard: int = DEFAULT_GUARD,
) -> RatioReport:
    counts = {label: 0 for label in HISTOGRAM_LABELS}
    worst = None
    argmax_index = None
    argmax_instance = None
    for row in iter_sweep(family, mechanism, objective, count, guard):
        counts[_bucket(row.ratio)] += 1
        if worst is None or row.ratio > worst:
            worst = row.ratio
            argmax_index = row.index
            argmax_instance = row.instance
    return RatioReport(
        mechanism=mechanism.label(),
        objective=objective,
        count=count,
        max_ratio=worst,
        argmax_index=argmax_index,
        argmax_instance=argmax_instance,
        histogram=tuple((label, counts[label]) for label in HISTOGRAM_LABELS),
    )


# ---------------------------------------------------------------------------
# lower-bound replays


REPLAY_CONSTRUCTIONS = (
    "single-deterministic",
    "single-randomized",
    "two-deterministic",
    "two-randomized",
)

_REPLAY_TABLE = {
    "single-deterministic": (SINGLE_LB_BASE, SINGLE_LB_SHIFTED, Fraction(3)),
    "single-randomized": (SINGLE_LB_BASE, SINGLE_LB_SHIFTED, Fraction(2)),
    "two-deterministic": (TWO_LB_BASE, TWO_LB_SHIFTED, Fraction(3)),
    "two-randomized": (TWO_LB_BASE, TWO_LB_SHIFTED, Fraction(2)),
}


@dataclass(frozen=True)
class ReplayReport:
    """One lower-bound argument executed as a runtime check.

    The base and shifted profiles differ only in agent 2's location
    (moved to 3), so the shifted run doubles as agent 2's misreport in
    the base profile.  A mechanism whose max-cost ratio on the shifted
    profile beats the bound must, if the argument is tight, hand agent 2
    a strictly profitable lie; sp_violation reports whether it actually
    does.  The margin is truthful cost minus post-misreport cost at the
    true location (positive means the lie pays).

    For the two-facility pairs, far_missing_* is the probability mass on
    outcomes that skip the far candidate; the argument needs that mass
    to vanish as the far point recedes, and the report states it for the
    finite far point used instead of asserting it is 0.
    """

    construction: str
    mechanism: str
    eps: Fraction
    far: Optional[Fraction]
    bound: Fraction
    instance_base: Instance
    instance_shifted: Instance
    outcome_base: Outcome
    outcome_shifted: Outcome
    ratio_base: Ratio
    ratio_shifted: Ratio
    beats_bound: bool
    manipulator: int
    misreport: Fraction
    cost_truthful: Fraction
    cost_misreport: Fraction
    margin: Fraction
    sp_violation: bool
    far_missing_base: Optional[Fraction]
    far_missing_shifted: Optional[Fraction]


def _far_missing(outcome: Outcome, far_index: int) -> Fraction:
    if not hasattr(outcome, "support"):
        return Fraction(0) if far_index in outcome.selection else Fraction(1)
    return sum(
        (prob for det, prob in outcome.support if far_index not in det.selection),
        Fraction(0),
    )


def replay_lower_bound(
    construction: str,
    mechanism,
    eps,
    far=Fraction(1000),
) -> ReplayReport:
    """Run one lower-bound construction at concrete parameter values."""
    if construction not in _REPLAY_TABLE:
        raise ValueError(
            f"unknown construction {construction!r}; expected one of {REPLAY_CONSTRUCTIONS}"
        )
    base_name, shifted_name, bound = _REPLAY_TABLE[construction]
    two_facility = construction.startswith("two-")
    params = PaperConstruction(base_name, eps=eps, far=far)
    base = build_paper_instance(params)
    shifted = build_paper_instance(PaperConstruction(shifted_name, eps=eps, far=far))
    outcome_base = mechanism.apply(base)
    outcome_shifted = mechanism.apply(shifted)
    ratio_base = ratio_of(outcome_cost(base, outcome_base, "mc"), optimal(base, "mc").value)
    ratio_shifted = ratio_of(
        outcome_cost(shifted, outcome_shifted, "mc"), optimal(shifted, "mc").value
    )
    # agent 2's lie: with everyone else truthful, reporting 3 turns the
    # base profile into the shifted one
    cost_truthful = outcome_agent_cost(base, outcome_base, 2)
    cost_misreport = outcome_agent_cost(base, outcome_shifted, 2)
    margin = cost_truthful - cost_misreport
    beats = ratio_shifted < bound
    return ReplayReport(
        construction=construction,
        mechanism=mechanism.label(),
        eps=params.eps,
        far=params.far if two_facility else None,
        bound=bound,
        instance_base=base,
        instance_shifted=shifted,
        outcome_base=outcome_base,
        outcome_shifted=outcome_shifted,
        ratio_base=ratio_base,
        ratio_shifted=ratio_shifted,
        beats_bound=beats,
        manipulator=2,
        misreport=Fraction(3),
        cost_truthful=cost_truthful,
        cost_misreport=cost_misreport,
        margin=margin,
        sp_violation=bool(beats and margin > 0),
        far_missing_base=_far_missing(outcome_base, 3) if two_facility else None,
        far_missing_shifted=_far_missing(outcome_shifted, 3) if two_facility else None,
    )
