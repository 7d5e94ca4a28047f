"""chaoscale: desk-scale numerics for chaos-scaled Brownian martingales.

Submodules: paths (grid/finite-energy paths), factors, chaos (product-form
kernels and scalings), skeleton (deterministic skeleton map), roughpath
(level-2 lifts and p-variation), simulate (Monte-Carlo iterated integrals
and tail bounds), system (the closed linear SDE system), ldp (rate
functions and slope diagnostics), cli.
"""

from . import backend
from .chaos import (
    ChaosVector,
    Kernel,
    ProductTerm,
    approx_schedule,
    chaos_from_json,
    chaos_norm_sq,
    chaos_to_json,
    cube_norm_sq,
    gamma_scale,
    ou_scale,
    simplex_norm_sq,
    single_term_vector,
    sym_cube_norm_sq,
    symmetrize,
    tail_orders,
    term,
    truncate,
    truncation_tail_bound,
    vector,
)
from .errors import DomainError, EstimationError, ResolutionMismatch
from .factors import FactorFn, constant, factor_inner, grid, poly
from .ldp import (
    EventSpec,
    RateOptions,
    RateResult,
    SlopeResult,
    ball_complement,
    exp_equiv_gap,
    ldp_slope,
    rate_of_event,
    rate_of_point,
    sup_exceed,
    terminal_exceed,
)
from .paths import (
    CameronMartinPath,
    GridPath,
    cm_from_function,
    cm_from_slopes,
    energy,
    pairing,
    path_from_json,
    path_to_json,
    sample_level_set,
    sup_norm,
)
from .roughpath import (
    GridRoughPath,
    chen_compose,
    dilate,
    lift_piecewise_linear,
    p_var_dist,
    p_var_level,
)
from .simulate import (
    BrownianPath,
    MCEstimate,
    doob_bound,
    hu_meyer_gap,
    hyper_tail_bound,
    ito_iterated,
    mc_sup_tail,
    sample_bm,
    strat_iterated,
    tail_constant,
)
from .skeleton import (
    SkeletonResult,
    eval_skeleton,
    eval_term,
    modulus_bound,
    uniform_gap,
)
from .system import (
    SystemDynamics,
    build_system,
    integrate_system,
    integrate_system_batch,
    integrate_system_smooth,
)

__version__ = "0.1.0"
