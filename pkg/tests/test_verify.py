from fractions import Fraction as F

import pytest

from flgames.core import Deterministic, Randomized, line_instance, metric_instance
from flgames.instances import (
    PaperConstruction,
    RandomFamily,
    build_paper_instance,
    random_line_instance,
)
from flgames.mechanisms import (
    LEFTMOST,
    MEAN,
    MEDIAN,
    RD,
    TWO_EXTREMES,
    MechanismMismatch,
    dictator_spec,
)
from flgames.solver import INFINITE_RATIO, GuardExceeded, ratio
from flgames.verify import (
    check_anonymity,
    find_group_deviation,
    find_unilateral_deviation,
    iter_sweep,
    misreport_set,
    replay_lower_bound,
    sweep,
)

LB_BASE = build_paper_instance(PaperConstruction("single-lb-I", eps=F(1, 10)))

# crafted so the mean rule resists every single misreport in the searched
# set but falls to agents 1 and 2 lying jointly
PAIR_TRAP = line_instance((F(13, 8), F(15, 8), -4, -4), (0, 2), k=1)


def test_misreport_set_on_the_line():
    ms = misreport_set(LB_BASE)
    points = ms.points
    # all true locations are present, the window is one span wide on
    # each side, and the scan order is ascending
    for loc in (F(0), F(2), F(9, 10), F(11, 10)):
        assert loc in points
    assert points[0] == -2 and points[-1] == 4
    assert list(points) == sorted(set(points))
    assert ms.size == 45
    assert ms.grid_points == 41
    assert ms.for_agent(1) == ms.for_agent(2) == points


def test_misreport_set_grid_sizes():
    assert misreport_set(LB_BASE, grid_points=0).size == 4
    assert misreport_set(LB_BASE, grid_points=3).size == 7  # -2, 1, 4 plus locations
    with pytest.raises(ValueError):
        misreport_set(LB_BASE, grid_points=-1)


def test_misreport_set_metric_is_every_point():
    inst = metric_instance(((0, 1, 1), (1, 0, 1), (1, 1, 0)), (1,), (2, 3), k=1)
    assert misreport_set(inst).points == (1, 2, 3)


def test_truthful_mechanisms_yield_no_witness():
    for mech in (LEFTMOST, MEDIAN, RD, dictator_spec(1), dictator_spec(2)):
        assert find_unilateral_deviation(LB_BASE, mech) is None


def test_strawman_witness_is_exact_and_replayable():
    witness = find_unilateral_deviation(LB_BASE, MEAN)
    assert witness.coalition == (2,)
    assert witness.misreports == (F(23, 20),)
    assert witness.outcome_before == Deterministic((1,))
    assert witness.outcome_after == Deterministic((2,))
    assert witness.costs_before == (F(11, 10),)
    assert witness.costs_after == (F(9, 10),)
    # replay the lie by hand
    shifted = LB_BASE.replace_agents((F(9, 10), F(23, 20)))
    assert MEAN.apply(shifted) == witness.outcome_after


def test_agent_already_served_is_skipped():
    inst = line_instance((1,), (1, 5), k=1)
    assert find_unilateral_deviation(inst, MEAN) is None


def test_group_search_of_size_one_matches_unilateral():
    for mech, inst in ((MEAN, LB_BASE), (LEFTMOST, LB_BASE), (MEAN, PAIR_TRAP)):
        unilateral = find_unilateral_deviation(inst, mech)
        group = find_group_deviation(inst, mech, max_coalition=1)
        assert unilateral == group


def test_pair_trap_needs_a_coalition():
    assert find_unilateral_deviation(PAIR_TRAP, MEAN) is None
    witness = find_group_deviation(PAIR_TRAP, MEAN, max_coalition=2)
    assert witness.coalition == (1, 2)
    assert witness.misreports == (F(22, 5), F(8))
    assert witness.outcome_before == Deterministic((1,))
    assert witness.outcome_after == Deterministic((2,))
    assert witness.costs_before == (F(13, 8), F(15, 8))
    assert witness.costs_after == (F(3, 8), F(1, 8))
    # both lies really do pay off
    shifted = PAIR_TRAP.replace_agents((F(22, 5), F(8), F(-4), F(-4)))
    assert MEAN.apply(shifted) == Deterministic((2,))


def test_group_clean_for_group_strategyproof_rules():
    family = RandomFamily("line-uniform", n=4, m=3, seed=77)
    for index in range(10):
        inst = random_line_instance(family, index)
        assert find_group_deviation(inst, LEFTMOST, max_coalition=3, grid_points=3) is None
        assert (
            find_group_deviation(inst, dictator_spec(1), max_coalition=3, grid_points=3)
            is None
        )


def test_group_search_guard_and_bounds():
    with pytest.raises(GuardExceeded):
        find_group_deviation(LB_BASE, MEAN, max_coalition=2, guard=100)
    with pytest.raises(ValueError):
        find_group_deviation(LB_BASE, MEAN, max_coalition=3)
    with pytest.raises(ValueError):
        find_group_deviation(LB_BASE, MEAN, max_coalition=0)


def test_anonymity_of_anonymous_rules():
    for mech in (LEFTMOST, MEDIAN, RD, MEAN):
        assert check_anonymity(LB_BASE, mech) is None


def test_anonymity_violation_of_dictatorship():
    inst = line_instance((0, 5), (0, 5), k=1)
    assert check_anonymity(inst, dictator_spec(1)) == (2, 1)
    assert check_anonymity(inst, LEFTMOST) is None


def test_anonymity_sampled_for_larger_profiles():
    inst = line_instance((0, 1, 2, 3, 4, 5, 6), (0, 6), k=1)
    assert inst.n == 7
    assert check_anonymity(inst, LEFTMOST, trials=50, seed=3) is None
    assert check_anonymity(inst, dictator_spec(1), trials=50, seed=3) is not None


def test_single_agent_trivially_anonymous():
    inst = line_instance((1,), (0, 2), k=1)
    assert check_anonymity(inst, LEFTMOST) is None


# ---------------------------------------------------------------------------
# sweeps


def test_sweep_rows_are_deterministic():
    family = RandomFamily("line-uniform", n=3, m=3, seed=5)
    first = list(iter_sweep(family, LEFTMOST, "mc", 20))
    second = list(iter_sweep(family, LEFTMOST, "mc", 20))
    assert first == second


def test_sweep_report_shape_and_bounds():
    family = RandomFamily("line-uniform", n=3, m=3, seed=5)
    report = sweep(family, LEFTMOST, "mc", 50)
    assert report.count == 50
    assert report.mechanism == "leftmost"
    assert report.objective == "mc"
    assert report.max_ratio >= 1
    assert report.max_ratio <= 3  # proven bound for this rule
    assert 0 <= report.argmax_index < 50
    assert report.argmax_instance == random_line_instance(family, report.argmax_index)
    assert sum(count for _, count in report.histogram) == 50
    assert dict(report.histogram)["<1"] == 0
    assert dict(report.histogram)["inf"] == 0


def test_sweep_metric_family():
    family = RandomFamily("metric-closure", n=3, m=2, seed=6)
    report = sweep(family, dictator_spec(1), "mc", 25)
    assert report.count == 25
    assert 1 <= report.max_ratio <= 3


def test_sweep_empty():
    family = RandomFamily("line-uniform", n=3, m=3, seed=5)
    report = sweep(family, LEFTMOST, "mc", 0)
    assert report.count == 0
    assert report.max_ratio is None
    assert report.argmax_index is None
    assert report.argmax_instance is None
    assert all(count == 0 for _, count in report.histogram)


def test_sweep_two_extremes_social_cost():
    family = RandomFamily("line-uniform", n=4, m=3, k=2, seed=8)
    report = sweep(family, TWO_EXTREMES, "sc", 50)
    assert 1 <= report.max_ratio <= 2 * 4 - 3


# ---------------------------------------------------------------------------
# lower-bound replays


def test_replay_single_deterministic_leftmost():
    report = replay_lower_bound("single-deterministic", LEFTMOST, eps=F(1, 10))
    assert report.bound == 3
    assert report.outcome_base == Deterministic((1,))
    assert report.outcome_shifted == Deterministic((1,))
    assert report.ratio_base == 1
    assert report.ratio_shifted == F(30, 11)
    assert report.beats_bound
    assert report.margin == 0
    assert not report.sp_violation
    assert report.far is None and report.far_missing_base is None


def test_replay_single_deterministic_catches_the_strawman():
    report = replay_lower_bound("single-deterministic", MEAN, eps=F(1, 10))
    assert report.outcome_base == Deterministic((1,))
    assert report.outcome_shifted == Deterministic((2,))
    assert report.ratio_shifted == 1
    assert report.cost_truthful == F(11, 10)
    assert report.cost_misreport == F(9, 10)
    assert report.margin == F(1, 5)
    assert report.sp_violation


def test_replay_single_randomized_random_dictatorship():
    report = replay_lower_bound("single-randomized", RD, eps=F(1, 10))
    assert report.bound == 2
    half = F(1, 2)
    assert report.outcome_shifted == Randomized(
        ((Deterministic((1,)), half), (Deterministic((2,)), half))
    )
    assert report.ratio_shifted == F(41, 22)
    assert report.beats_bound
    # the lie is exactly cost neutral for agent 2, so no violation
    assert report.cost_truthful == 1
    assert report.cost_misreport == 1
    assert report.margin == 0
    assert not report.sp_violation


def test_replay_two_facility_pair():
    report = replay_lower_bound("two-deterministic", TWO_EXTREMES, eps=F(1, 10))
    assert report.far == 1000
    assert report.outcome_base == Deterministic((1, 3))
    assert report.ratio_base == 1
    assert report.ratio_shifted == F(30, 11)
    assert report.far_missing_base == 0
    assert report.far_missing_shifted == 0
    assert not report.sp_violation
    randomized = replay_lower_bound("two-randomized", TWO_EXTREMES, eps=F(1, 10))
    assert randomized.bound == 2
    assert not randomized.beats_bound


def test_replay_rejects_bad_arguments():
    with pytest.raises(ValueError):
        replay_lower_bound("three-sided", LEFTMOST, eps=F(1, 10))
    with pytest.raises(MechanismMismatch):
        replay_lower_bound("two-deterministic", RD, eps=F(1, 10))
    with pytest.raises(ValueError):
        replay_lower_bound("single-deterministic", LEFTMOST, eps=F(3, 2))


def test_infinite_ratio_never_appears_for_these_rules():
    # all agents on one candidate: the optimum is 0 and so is the cost
    inst = line_instance((1, 1), (1, 3), k=1)
    assert ratio(inst, LEFTMOST, "mc") == 1
    assert ratio(inst, RD, "sc") == 1
    assert INFINITE_RATIO > 1  # marker stays comparable either way
