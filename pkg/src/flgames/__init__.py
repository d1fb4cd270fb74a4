"""Facility location games with candidate locations: exact mechanisms,
exhaustive optima, and strategyproofness falsification."""

from .core import (
    LINE,
    Deterministic,
    FiniteMetric,
    Instance,
    Line,
    Outcome,
    Randomized,
    Scalar,
    agent_cost,
    distance,
    expected_agent_cost,
    expected_cost,
    line_instance,
    max_cost,
    metric_instance,
    outcome_agent_cost,
    outcome_cost,
    parse_scalar,
    point_mass,
    social_cost,
)
from .instances import (
    CONSTRUCTION_NAMES,
    GRID_DENOMINATOR,
    PaperConstruction,
    RandomFamily,
    build_paper_instance,
    metric_closure,
    random_instance,
    random_line_instance,
    random_metric_instance,
)
from .mechanisms import (
    LEFTMOST,
    MEAN,
    MEDIAN,
    RD,
    TWO_EXTREMES,
    MechanismMismatch,
    MechanismSpec,
    closest_to_mean,
    dictator_spec,
    dictatorship,
    leftmost_closest,
    median,
    parse_mechanism,
    random_dictatorship,
    two_extremes,
    wpv,
    wpv_spec,
)
from .solver import (
    DEFAULT_GUARD,
    INFINITE_RATIO,
    GuardExceeded,
    OptResult,
    Ratio,
    optimal,
    ratio,
    ratio_of,
)
from .verify import (
    DEFAULT_GRID_POINTS,
    REPLAY_CONSTRUCTIONS,
    DeviationWitness,
    MisreportSet,
    RatioReport,
    ReplayReport,
    SweepRow,
    check_anonymity,
    find_group_deviation,
    find_unilateral_deviation,
    iter_sweep,
    misreport_set,
    replay_lower_bound,
    sweep,
)

__version__ = "0.1.0"
