"""Computational laboratory for Brownian motion in a heavy-tailed Poissonian
potential: annealed partition functions, tilted environments, confinement and
occupation statistics, spectral and Lifshitz-tail estimates.
"""

from .model import (
    ConstantsBundle,
    ModelParams,
    constants,
    groundstate_phi1,
    h_t,
    nu_coordinate_variance,
    nu_density,
    quadratic_profile,
    scale_r,
    shape_vhat,
    spectral_gap,
    vhat_radial,
)
from .points import (
    Box,
    DiscreteMeasure,
    PointConfig,
    sample_homogeneous,
    sample_tilted,
    stream,
    tilt_acceptance,
    tilt_log_weight,
)
from .potential import (
    MinimizerResult,
    PotentialView,
    evaluate_V,
    far_field_bound,
    find_local_min,
    profile_deviation,
    window_margin,
)
from .laplace import (
    QuadratureSpec,
    exact_log_laplace,
    exact_mgf_V0,
    predicted_log_laplace,
    predicted_tilted_mean,
    stay_probability,
    strategy_log_lower_bound,
    tilted_mean_V,
    tilted_variance_V,
    two_point_bound_check,
    variance_limit_closed_form,
    variance_limit_quadrature,
)
from .spectral import (
    EigenResult,
    Grid,
    GridField,
    IdsCurve,
    assemble,
    config_potential_field,
    count_below,
    ids_estimate,
    rayleigh_quotient,
    smallest_eigs,
)
from .semigroup import (
    AnnealedEstimate,
    EvolutionSpec,
    FKStepper,
    annealed_partition,
    brownian_partition_mc,
    confinement_prob,
    delta_field,
    fk_evolve,
    groundstate_transform_check,
    make_grid,
    occupation_evolve,
    occupation_functional,
    ones_field,
    quenched_partition,
    time_marginal,
)
from .experiments import (
    ARTIFACT_VERSION,
    SCENARIOS,
    PowerLawFit,
    RunRecord,
    batched_evolve,
    config_hash,
    default_schedule,
    field_abs_quantile,
    fit_power_law,
    run_confinement,
    run_constants,
    run_ids,
    run_laplace,
    run_lemma5,
    run_local_min_stats,
    run_localization,
    run_mgf,
    run_occupation,
    run_ou_limit,
    run_spectrum,
    run_tilted,
)
from .plots import render_svg

__version__ = "0.1.0"
