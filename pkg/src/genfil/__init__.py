"""Generalized filtrations over binomial asset lattices.

Filtrations here are functors from a dyadic time grid into finite weighted
path spaces with null-preserving maps; besides the classical restriction
arrows they admit forget arrows that erase one recorded move.  On top of
that sit conditional expectation along any arrow, risk-neutral
re-weightings, claim valuation, replication extraction, arbitrage checks,
and subjectively recorded paths, all exactly verifiable by enumeration.
"""

from .binomial import (
    BernoulliParams,
    Filtration,
    FunctorLawReport,
    Path,
    build_space,
    check_functor_laws,
    drop_map,
    drop_morphism,
    enumerate_paths,
    full_map,
    full_morphism,
    make_drop_filtration,
    make_full_filtration,
    next_bit_fiber,
    xi,
)
from .errors import (
    EnumerationCapError,
    FactorizationError,
    GenfilError,
    MartingaleBoundError,
    NullPreservationError,
    ResolutionError,
    ScenarioError,
    TimeOrderError,
)
from .experienced import (
    experienced_path,
    filtrations_equal,
    naturality_check,
    recording_map,
    tilde_filtration,
)
from .market import (
    AdaptedProcess,
    ArbitrageSearch,
    MarketParams,
    Strategy,
    bond_process,
    bond_value,
    detect_arbitrage,
    discounted_stock,
    gain_process,
    is_arbitrage,
    is_self_financing,
    portfolio_value,
    stock_process,
)
from .probability import (
    EPS_EQ,
    EPS_MASS,
    FinProbSpace,
    ProbMorphism,
    RandomVariable,
    conditional_expectation,
    expectation,
    is_null_preserving,
    pushforward,
)
from .risk_neutral import (
    MartingaleConstants,
    QFunction,
    RiskNeutralFiltration,
    build_risk_neutral,
    build_rn_drop,
    build_rn_full,
    equivalence_witnesses,
    martingale_check,
    martingale_constants,
    q_star,
    qcond_equivalences,
    verify_null_preserving_under_q,
)
from .scenario import Scenario, load_scenario, load_scenario_file
from .timegrid import GridTime, TimeArrow, arrow, grid_points
from .valuation import (
    Claim,
    PriceLattice,
    g_factorize,
    price,
    price_lattice,
    replicate,
    replication_check,
)

__all__ = [name for name in dir() if not name.startswith("_")]
