"""Facility location games with candidate locations.

Agents report points of a space, a mechanism selects facilities from a
finite candidate set, and each agent pays its distance to the nearest
selected facility.  Every quantity here (coordinates, distances,
probabilities, costs) is an exact rational, so tie-breaking is decided
exactly and near-degenerate instances (tiny eps, huge far points) lose
nothing to rounding.

Conventions:
  * agent, candidate, and metric-point indices are 1-based
  * a point on the line is a Fraction; a point of a finite metric space
    is an index into its distance matrix
  * objectives are "sc" (social cost, the sum) and "mc" (maximum cost)
"""

from __future__ import annotations

import itertools
from dataclasses import dataclass
from fractions import Fraction
from math import lcm
from typing import Sequence, Union

Scalar = Fraction

OBJECTIVES = ("sc", "mc")


def parse_scalar(value) -> Fraction:
    """Parse an exact number.

    Accepts Fraction, int, or a string in decimal ("0.9") or rational
    ("9/10") form.  Floats are rejected: binary floating point cannot
    represent most of these values exactly.
    """
    if isinstance(value, Fraction):
        return value
    if isinstance(value, int):
        return Fraction(value)
    if isinstance(value, str):
        try:
            return Fraction(value)
        except (ValueError, ZeroDivisionError):
            raise ValueError(f"not an exact number: {value!r}") from None
    raise TypeError(f"cannot parse {type(value).__name__} exactly; use str, int, or Fraction")


def validate_objective(objective: str) -> str:
    if objective not in OBJECTIVES:
        raise ValueError(f"unknown objective {objective!r}; expected one of {OBJECTIVES}")
    return objective


# ---------------------------------------------------------------------------
# spaces


@dataclass(frozen=True)
class Line:
    """The real line.  Points are exact rationals."""


LINE = Line()


@dataclass(frozen=True)
class FiniteMetric:
    """A finite metric space given by an explicit distance matrix.

    The matrix must be square and symmetric with a zero diagonal,
    nonnegative entries, and must satisfy the triangle inequality.  All
    of this is checked at construction, so downstream code can rely on
    any FiniteMetric value being a genuine (pseudo)metric.
    """

    matrix: tuple[tuple[Fraction, ...], ...]

    def __post_init__(self):
        rows = tuple(tuple(parse_scalar(entry) for entry in row) for row in self.matrix)
        object.__setattr__(self, "matrix", rows)
        p = len(rows)
        if p == 0:
            raise ValueError("empty distance matrix")
        if any(len(row) != p for row in rows):
            raise ValueError("distance matrix is not square")
        # Scale to a common denominator once so the O(p^3) triangle scan
        # runs on machine integers instead of Fraction arithmetic.
        scale = lcm(*{entry.denominator for row in rows for entry in row})
        ints = [[entry.numerator * (scale // entry.denominator) for entry in row] for row in rows]
        for i in range(p):
            if ints[i][i] != 0:
                raise ValueError(f"nonzero self-distance at point {i + 1}")
            for j in range(i + 1, p):
                if ints[i][j] != ints[j][i]:
                    raise ValueError(f"asymmetric distances between points {i + 1} and {j + 1}")
                if ints[i][j] < 0:
                    raise ValueError(f"negative distance between points {i + 1} and {j + 1}")
        for mid in range(p):
            row_mid = ints[mid]
            for i in range(p):
                via = ints[i][mid]
                row_i = ints[i]
                for j in range(p):
                    if via + row_mid[j] < row_i[j]:
                        raise ValueError(
                            f"triangle inequality fails: d({i + 1},{j + 1}) > "
                            f"d({i + 1},{mid + 1}) + d({mid + 1},{j + 1})"
                        )

    @property
    def size(self) -> int:
        return len(self.matrix)


Space = Union[Line, FiniteMetric]


def distance(space: Space, a, b) -> Fraction:
    """Exact distance between two points of a space."""
    if isinstance(space, Line):
        return abs(a - b)
    p = space.size
    if not (1 <= a <= p and 1 <= b <= p):
        raise IndexError(f"point index out of range for a {p}-point space: {a}, {b}")
    return space.matrix[a - 1][b - 1]


# ---------------------------------------------------------------------------
# instances


@dataclass(frozen=True)
class Instance:
    """A profile of agent locations, a candidate set, and a facility count.

    Agents are kept in reported order (mechanisms that depend on agent
    identity, and anonymity checks, need it).  k is the number of
    facilities to open, at most two; opening both facilities on the same
    candidate is allowed.
    """

    space: Space
    agents: tuple
    candidates: tuple
    k: int

    def __post_init__(self):
        if isinstance(self.space, Line):
            agents = tuple(parse_scalar(x) for x in self.agents)
            candidates = tuple(parse_scalar(y) for y in self.candidates)
        else:
            agents = tuple(self.agents)
            candidates = tuple(self.candidates)
            p = self.space.size
            for x in agents + candidates:
                if not isinstance(x, int) or isinstance(x, bool) or not 1 <= x <= p:
                    raise ValueError(f"not a point of the {p}-point space: {x!r}")
        object.__setattr__(self, "agents", agents)
        object.__setattr__(self, "candidates", candidates)
        if not agents:
            raise ValueError("an instance needs at least one agent")
        if not candidates:
            raise ValueError("an instance needs at least one candidate")
        if self.k not in (1, 2):
            raise ValueError(f"facility count must be 1 or 2, got {self.k}")

    @property
    def n(self) -> int:
        return len(self.agents)

    @property
    def m(self) -> int:
        return len(self.candidates)

    def agent(self, i: int):
        if not 1 <= i <= self.n:
            raise IndexError(f"agent index out of range: {i}")
        return self.agents[i - 1]

    def candidate(self, j: int):
        if not 1 <= j <= self.m:
            raise IndexError(f"candidate index out of range: {j}")
        return self.candidates[j - 1]

    def replace_agents(self, agents: Sequence) -> "Instance":
        return Instance(self.space, tuple(agents), self.candidates, self.k)


def line_instance(agents, candidates, k: int = 1) -> Instance:
    return Instance(LINE, tuple(agents), tuple(candidates), k)


def metric_instance(matrix, agents, candidates, k: int = 1) -> Instance:
    return Instance(FiniteMetric(tuple(tuple(row) for row in matrix)), tuple(agents), tuple(candidates), k)


# ---------------------------------------------------------------------------
# outcomes


@dataclass(frozen=True)
class Deterministic:
    """A selection of candidate indices, one per facility.

    Order is preserved (the two-extremes rule reports the left facility
    first); duplicates are allowed and mean both facilities share a
    candidate.
    """

    selection: tuple[int, ...]

    def __post_init__(self):
        object.__setattr__(self, "selection", tuple(self.selection))
        if not self.selection:
            raise ValueError("empty selection")
        for j in self.selection:
            if not isinstance(j, int) or isinstance(j, bool) or j < 1:
                raise ValueError(f"candidate indices are 1-based ints, got {j!r}")


@dataclass(frozen=True)
class Randomized:
    """An exact probability distribution over deterministic selections.

    Canonical form is enforced at construction: support sorted by
    selection, duplicate selections merged, zero-probability entries
    dropped, probabilities summing to exactly 1.  Two Randomized values
    therefore compare equal iff they are the same distribution.
    """

    support: tuple[tuple[Deterministic, Fraction], ...]

    def __post_init__(self):
        merged: dict[tuple[int, ...], Fraction] = {}
        for outcome, prob in self.support:
            if not isinstance(outcome, Deterministic):
                outcome = Deterministic(tuple(outcome))
            prob = parse_scalar(prob)
            if prob < 0:
                raise ValueError(f"negative probability {prob}")
            merged[outcome.selection] = merged.get(outcome.selection, Fraction(0)) + prob
        total = sum(merged.values(), Fraction(0))
        if total != 1:
            raise ValueError(f"probabilities sum to {total}, not 1")
        canon = tuple(
            (Deterministic(sel), prob) for sel, prob in sorted(merged.items()) if prob != 0
        )
        object.__setattr__(self, "support", canon)


Outcome = Union[Deterministic, Randomized]


def point_mass(outcome: Deterministic) -> Randomized:
    return Randomized(((outcome, Fraction(1)),))


# ---------------------------------------------------------------------------
# costs


def agent_cost(instance: Instance, outcome: Deterministic, i: int) -> Fraction:
    """Distance from agent i to the nearest selected facility."""
    x = instance.agent(i)
    space = instance.space
    return min(distance(space, x, instance.candidate(j)) for j in outcome.selection)


def social_cost(instance: Instance, outcome: Deterministic) -> Fraction:
    return sum(agent_cost(instance, outcome, i) for i in range(1, instance.n + 1))


def max_cost(instance: Instance, outcome: Deterministic) -> Fraction:
    return max(agent_cost(instance, outcome, i) for i in range(1, instance.n + 1))


def objective_cost(instance: Instance, outcome: Deterministic, objective: str) -> Fraction:
    validate_objective(objective)
    return social_cost(instance, outcome) if objective == "sc" else max_cost(instance, outcome)


def expected_cost(instance: Instance, outcome: Randomized, objective: str) -> Fraction:
    """Expected objective value of a randomized outcome."""
    validate_objective(objective)
    return sum(
        prob * objective_cost(instance, det, objective) for det, prob in outcome.support
    )


def expected_agent_cost(instance: Instance, outcome: Randomized, i: int) -> Fraction:
    return sum(prob * agent_cost(instance, det, i) for det, prob in outcome.support)


def outcome_cost(instance: Instance, outcome: Outcome, objective: str) -> Fraction:
    """Objective value of an outcome, in expectation if randomized."""
    if isinstance(outcome, Deterministic):
        return objective_cost(instance, outcome, objective)
    return expected_cost(instance, outcome, objective)


def outcome_agent_cost(instance: Instance, outcome: Outcome, i: int) -> Fraction:
    if isinstance(outcome, Deterministic):
        return agent_cost(instance, outcome, i)
    return expected_agent_cost(instance, outcome, i)


def permute_agents(instance: Instance, permutation: Sequence[int]) -> Instance:
    """Reorder the agent profile: new agent i is old agent permutation[i-1]."""
    if sorted(permutation) != list(range(1, instance.n + 1)):
        raise ValueError(f"not a permutation of 1..{instance.n}: {permutation}")
    return instance.replace_agents(tuple(instance.agents[p - 1] for p in permutation))


def all_permutations(n: int):
    """All permutations of 1..n in lexicographic order."""
    return itertools.permutations(range(1, n + 1))
