"""Mechanisms: rules mapping an instance to an outcome.

Tie-breaking is part of each rule's definition and is exact:

  * leftmost:     candidate closest to the leftmost agent, ties to the
                  smaller coordinate (then smaller index)
  * dictator:i    candidate closest to agent i, ties to the smaller index
  * two-extremes: candidate closest to the leftmost agent with ties to
                  the LARGER coordinate, plus candidate closest to the
                  rightmost agent with ties to the SMALLER coordinate
                  (the asymmetric tie rules are what keep the rule group
                  strategyproof), reported left facility first
  * median:       candidate closest to the left median agent (sorted
                  rank ceil(n/2)), ties to the smaller coordinate
  * rd:           random dictatorship; each agent votes for its closest
                  candidate (ties to the smaller index), a candidate's
                  probability is its share of the votes
  * wpv:          weighted percentile voting; the agent of sorted rank
                  i gets probability weights[i-1] for its closest
                  candidate (ties to the smaller coordinate)
  * mean:         candidate closest to the mean agent coordinate, ties
                  to the smaller coordinate; a deliberately manipulable
                  strawman used to exercise the deviation search

Coordinate ties between candidates at the same location fall back to
the smaller index; the selected location is unaffected.
"""

from __future__ import annotations

from dataclasses import dataclass
from fractions import Fraction
from typing import Optional

from .core import (
    Deterministic,
    Instance,
    Line,
    Outcome,
    Randomized,
    distance,
    parse_scalar,
)


class MechanismMismatch(ValueError):
    """Mechanism applied to an instance it is not defined for."""


def _require(instance: Instance, name: str, k: int, line_only: bool) -> None:
    if line_only and not isinstance(instance.space, Line):
        raise MechanismMismatch(f"{name} is defined on the line only")
    if instance.k != k:
        raise MechanismMismatch(f"{name} opens {k} facility(ies), instance asks for {instance.k}")


def nearest_candidate_line(instance: Instance, point: Fraction, tie: str) -> int:
    """1-based index of the candidate closest to point on the line.

    tie "low" prefers the smaller coordinate, "high" the larger; equal
    coordinates fall back to the smaller index.
    """
    best = None
    for j, c in enumerate(instance.candidates, start=1):
        d = abs(c - point)
        if best is None:
            best = (d, c, j)
            continue
        bd, bc, _ = best
        if d < bd or (d == bd and (c < bc if tie == "low" else c > bc)):
            best = (d, c, j)
    return best[2]


def nearest_candidate_by_index(instance: Instance, point) -> int:
    """1-based index of the closest candidate, ties to the smaller index.
    Works on either space."""
    space = instance.space
    best_j = 1
    best_d = distance(space, point, instance.candidate(1))
    for j in range(2, instance.m + 1):
        d = distance(space, point, instance.candidate(j))
        if d < best_d:
            best_j, best_d = j, d
    return best_j


def leftmost_closest(instance: Instance) -> Deterministic:
    _require(instance, "leftmost", 1, line_only=True)
    return Deterministic((nearest_candidate_line(instance, min(instance.agents), "low"),))


def dictatorship(instance: Instance, dictator: int) -> Deterministic:
    if not 1 <= dictator <= instance.n:
        raise MechanismMismatch(f"dictator index {dictator} out of range 1..{instance.n}")
    _require(instance, "dictator", 1, line_only=False)
    return Deterministic((nearest_candidate_by_index(instance, instance.agent(dictator)),))


def two_extremes(instance: Instance) -> Deterministic:
    _require(instance, "two-extremes", 2, line_only=True)
    left = nearest_candidate_line(instance, min(instance.agents), "high")
    right = nearest_candidate_line(instance, max(instance.agents), "low")
    return Deterministic((left, right))


def median(instance: Instance) -> Deterministic:
    _require(instance, "median", 1, line_only=True)
    ordered = sorted(instance.agents)
    # left median: rank ceil(n/2), so (1, 5, 9, 10) has median 5
    pivot = ordered[(instance.n + 1) // 2 - 1]
    return Deterministic((nearest_candidate_line(instance, pivot, "low"),))


def random_dictatorship(instance: Instance) -> Randomized:
    _require(instance, "rd", 1, line_only=False)
    votes: dict[int, int] = {}
    for x in instance.agents:
        j = nearest_candidate_by_index(instance, x)
        votes[j] = votes.get(j, 0) + 1
    n = instance.n
    return Randomized(tuple((Deterministic((j,)), Fraction(count, n)) for j, count in votes.items()))


def wpv(instance: Instance, weights) -> Randomized:
    _require(instance, "wpv", 1, line_only=True)
    ws = tuple(parse_scalar(w) for w in weights)
    if len(ws) != instance.n:
        raise MechanismMismatch(f"need {instance.n} weights, got {len(ws)}")
    if any(w < 0 for w in ws) or sum(ws) != 1:
        raise MechanismMismatch("weights must be nonnegative and sum to 1")
    ranked = sorted(instance.agents)
    pairs = []
    for x, w in zip(ranked, ws):
        pairs.append((Deterministic((nearest_candidate_line(instance, x, "low"),)), w))
    return Randomized(tuple(pairs))


def closest_to_mean(instance: Instance) -> Deterministic:
    _require(instance, "mean", 1, line_only=True)
    center = sum(instance.agents, Fraction(0)) / instance.n
    return Deterministic((nearest_candidate_line(instance, center, "low"),))


# ---------------------------------------------------------------------------
# named specs (the CLI-facing form: "leftmost", "dictator:2", "wpv:1/2,1/2")


MECHANISM_KINDS = ("leftmost", "dictator", "two-extremes", "median", "rd", "wpv", "mean")


@dataclass(frozen=True)
class MechanismSpec:
    kind: str
    dictator: Optional[int] = None
    weights: Optional[tuple[Fraction, ...]] = None

    def __post_init__(self):
        if self.kind not in MECHANISM_KINDS:
            raise MechanismMismatch(f"unknown mechanism {self.kind!r}")
        if self.kind == "dictator":
            if self.dictator is None or self.dictator < 1:
                raise MechanismMismatch("dictator needs a 1-based agent index")
        elif self.kind == "wpv":
            if not self.weights:
                raise MechanismMismatch("wpv needs a weight vector")
            object.__setattr__(self, "weights", tuple(parse_scalar(w) for w in self.weights))

    @property
    def randomized(self) -> bool:
        return self.kind in ("rd", "wpv")

    def label(self) -> str:
        if self.kind == "dictator":
            return f"dictator:{self.dictator}"
        if self.kind == "wpv":
            return "wpv:" + ",".join(str(w) for w in self.weights)
        return self.kind

    def apply(self, instance: Instance) -> Outcome:
        kind = self.kind
        if kind == "leftmost":
            return leftmost_closest(instance)
        if kind == "dictator":
            return dictatorship(instance, self.dictator)
        if kind == "two-extremes":
            return two_extremes(instance)
        if kind == "median":
            return median(instance)
        if kind == "rd":
            return random_dictatorship(instance)
        if kind == "wpv":
            return wpv(instance, self.weights)
        return closest_to_mean(instance)


LEFTMOST = MechanismSpec("leftmost")
TWO_EXTREMES = MechanismSpec("two-extremes")
MEDIAN = MechanismSpec("median")
RD = MechanismSpec("rd")
MEAN = MechanismSpec("mean")


def dictator_spec(i: int) -> MechanismSpec:
    return MechanismSpec("dictator", dictator=i)


def wpv_spec(weights) -> MechanismSpec:
    return MechanismSpec("wpv", weights=tuple(parse_scalar(w) for w in weights))


def parse_mechanism(text: str) -> MechanismSpec:
    """Parse a mechanism name as written on the command line."""
    name, _, arg = text.partition(":")
    if name == "dictator":
        try:
            return dictator_spec(int(arg))
        except ValueError:
            raise MechanismMismatch(f"bad dictator index {arg!r}") from None
    if name == "wpv":
        try:
            return wpv_spec(w for w in arg.split(","))
        except ValueError as exc:
            raise MechanismMismatch(f"bad wpv weights {arg!r}: {exc}") from None
    if arg:
        raise MechanismMismatch(f"mechanism {name!r} takes no argument")
    return MechanismSpec(name)
