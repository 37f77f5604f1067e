"""Fuzzy-stochastic uncertainty quantification for one-dimensional elliptic problems."""
from .core import (
    DEFAULT_LEVELS,
    FuzzyVariable,
    Interval,
    MembershipSample,
    alpha_cut,
    from_alpha_cuts,
    geq_scalar,
    leq_scalar,
    make_crisp,
    make_polygonal,
    make_triangular,
    membership,
    membership_samples,
    validate,
)
from .data import (
    PixelMap,
    SampleEnsemble,
    build_moment_vector,
    fit_membership,
    harmonic_coarsen,
    reference_moment_variables,
    sample_moments,
    station_moments,
    synthesize_fiber_map,
)
from .extension import (
    EvaluationError,
    PBoxFamily,
    extend,
    extend_oracle,
    failure_probability,
    fuzzy_cdf_type1,
    fuzzy_cdf_type2,
    fuzzy_expectation,
    level_extrema,
)
from .interaction import (
    Box,
    FuzzyVector,
    Interaction,
    Polyline,
    arc_length_point,
    candidate_points,
    comonotone_chain,
    discretize,
    joint_alpha_cut,
)
from .random_field import CovarianceSpec, KLExpansion, Sampler, evaluate_field, kl_decompose, kl_truncation_order
from .solver import (
    Example1Coefficient,
    Example2Coefficient,
    NonPositiveCoefficient,
    SolveConfig,
    expected_displacement,
    solution_alpha_cut,
    solve_displacement,
)
from .translation import (
    BetaParams,
    Infeasible,
    MomentSet,
    TranslationTable,
    beta_cdf,
    beta_inverse_cdf,
    beta_moments,
    fit_beta_from_moments,
    translate,
)

__version__ = "0.1.0"

__all__ = [
    "BetaParams",
    "Box",
    "CovarianceSpec",
    "DEFAULT_LEVELS",
    "EvaluationError",
    "Example1Coefficient",
    "Example2Coefficient",
    "FuzzyVariable",
    "FuzzyVector",
    "Infeasible",
    "Interaction",
    "Interval",
    "KLExpansion",
    "MembershipSample",
    "MomentSet",
    "NonPositiveCoefficient",
    "PBoxFamily",
    "PixelMap",
    "Polyline",
    "SampleEnsemble",
    "Sampler",
    "SolveConfig",
    "TranslationTable",
    "alpha_cut",
    "arc_length_point",
    "beta_cdf",
    "beta_inverse_cdf",
    "beta_moments",
    "build_moment_vector",
    "candidate_points",
    "comonotone_chain",
    "discretize",
    "evaluate_field",
    "expected_displacement",
    "extend",
    "extend_oracle",
    "failure_probability",
    "fit_beta_from_moments",
    "fit_membership",
    "from_alpha_cuts",
    "fuzzy_cdf_type1",
    "fuzzy_cdf_type2",
    "fuzzy_expectation",
    "geq_scalar",
    "harmonic_coarsen",
    "joint_alpha_cut",
    "kl_decompose",
    "kl_truncation_order",
    "leq_scalar",
    "level_extrema",
    "make_crisp",
    "make_polygonal",
    "make_triangular",
    "membership",
    "membership_samples",
    "reference_moment_variables",
    "sample_moments",
    "solution_alpha_cut",
    "solve_displacement",
    "station_moments",
    "synthesize_fiber_map",
    "translate",
    "validate",
]
