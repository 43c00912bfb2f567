"""Two-player fusion game between a sensor and a compromised computing unit.

The sensor blends its own estimate with the computer's output; the attacker
picks that output to pull the fused value toward its target. The package
provides the game, iterated best response, closed-form equilibria, analytic
convergence predicates and grid sweeps that check them against simulation.
"""

from .config import SweepConfig, config_from_dict, load_config
from .convergence import (
    PredicateReport,
    ZetaRegion,
    ZetaSet,
    mismatch_bound_holds,
    equal_means_report,
    projected_mismatch_bound_holds,
    necessary_region_union,
    nested_zeta_sets,
    predicate_batch,
    predicate_report,
    strong_sufficient,
    strong_sufficient_equal_means,
    sufficient_region_intersection,
    weak_necessary,
    weak_necessary_equal_means,
)
from .equilibrium import (
    Equilibrium,
    EquilibriumKind,
    analyze_mixed,
    mixed_equilibria,
    quadratic_coefficients,
    solve_quadratic,
    verify_nash,
    zero_equilibrium,
    zero_equilibrium_exists,
)
from .errors import (
    AlphaSaturated,
    ConfigError,
    DegenerateDirection,
    DegenerateGame,
    ParamsMismatch,
    PreconditionViolated,
    SamplingExhausted,
    TrustGameError,
)
from .game import (
    GameParams,
    Region,
    best_response_attacker,
    best_response_sensor,
    classify_region,
    cost_attacker,
    cost_defender,
    fuse,
)
from .geometry import HalfPlane, in_closed_half_plane, project, project_onto_affine_hull
from .ibr import (
    IbrConfig,
    IbrOutcome,
    IbrTrace,
    OutcomeKind,
    ibr_run,
    is_converging,
    run_batch,
    sample_initial_conditions,
)
from .sweep import RegionVerdict, evaluate_point, grid_points, write_regions, write_sweep

__version__ = "0.1.0"
