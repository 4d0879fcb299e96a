"""voxfpt: first-passage and reaction times on compartment lattices.

Closed-form collision/reaction-time estimates for two molecules on a 2D
lattice and three molecules on a 1D chain, exact Markov-chain solvers for the
same quantities on small lattices, event-driven stochastic samplers, and a
CSV experiment harness that cross-validates all three.
"""
from .model import (Boundary, DiffusionRates, Dimension, DomainSpec,
                    RateScaling, ReactionScheme, ValidationError, Variant,
                    WalkerState, general_propensity, propensity_single_triplet)
from .formulas import (MontrollCoefficients, TrimolRateSummary,
                       anisotropic_collision_2d, bimol_1d_limit,
                       bimol_collision_2d, bimol_reaction_2d,
                       collision_from_steps, encounter_time_1d_equal_rates,
                       exit_time_point, mean_exit_time_square,
                       mean_steps_to_origin, montroll_coefficients,
                       nsteps_2d, nsteps_one_apart, trimol_collision,
                       trimol_reaction)
from .oracle import (InitMode, OracleCapError, OracleResult,
                     ReachabilityError, expected_steps_discrete_2d,
                     mean_reaction_time_3walkers_1d, mfpt_collision_2walkers,
                     mfpt_collision_3walkers_1d, mfpt_pseudo_walker_trimol)
from .ssa import (FirstPassageSample, RdmeResult, RngStream, SamplerModel,
                  StopReason, run_ssa_rdme, sample_collision_2walkers_1d,
                  sample_collision_2walkers_2d, sample_collision_3walkers_1d,
                  sample_reaction_time)
from .experiments import (EstimatorSummary, ExperimentRecord, FigurePoint,
                          FitResult, SamplerSpec, compare_records, estimate,
                          figure_points, fit_intercept, reproduce_figure)

__version__ = "0.1.0"

__all__ = [
    "Boundary", "DiffusionRates", "Dimension", "DomainSpec", "RateScaling",
    "ReactionScheme", "ValidationError", "Variant", "WalkerState",
    "general_propensity", "propensity_single_triplet",
    "MontrollCoefficients", "TrimolRateSummary", "anisotropic_collision_2d",
    "bimol_1d_limit", "bimol_collision_2d", "bimol_reaction_2d",
    "collision_from_steps", "encounter_time_1d_equal_rates",
    "exit_time_point", "mean_exit_time_square", "mean_steps_to_origin",
    "montroll_coefficients", "nsteps_2d", "nsteps_one_apart",
    "trimol_collision", "trimol_reaction",
    "InitMode", "OracleCapError", "OracleResult", "ReachabilityError",
    "expected_steps_discrete_2d", "mean_reaction_time_3walkers_1d",
    "mfpt_collision_2walkers", "mfpt_collision_3walkers_1d",
    "mfpt_pseudo_walker_trimol",
    "FirstPassageSample", "RdmeResult", "RngStream", "SamplerModel",
    "StopReason", "run_ssa_rdme", "sample_collision_2walkers_1d",
    "sample_collision_2walkers_2d", "sample_collision_3walkers_1d",
    "sample_reaction_time",
    "EstimatorSummary", "ExperimentRecord", "FigurePoint", "FitResult",
    "SamplerSpec", "compare_records", "estimate", "figure_points",
    "fit_intercept", "reproduce_figure",
]
