"""Discretization of continuum-of-alleles mutation-selection equilibria.

The continuous operator ``A = T - U`` is replaced by finite matrices (Nystrom
sampling on compact intervals, Galerkin projection onto step functions on
truncated real-line domains); the leading eigenvalue gives the equilibrium
mean fitness and the Perron vector the equilibrium density.
"""

from .benchmarks import BENCHMARKS, house_of_cards_oracle
from .convergence import cross_method_compare, oracle_compare, refinement_study
from .discretize import (
    DiscreteOperator,
    StepDensity,
    embed_density,
    galerkin_matrices,
    k_alpha_matrix,
    nystrom_matrices,
    tv_distance,
)
from .eigensolver import (
    EigenResult,
    SolverConfig,
    perron_eigenpair,
    residual,
    solve_via_bisection,
    spectral_radius,
)
from .estimator import EquilibriumSolver
from .maxprinciple import locality_experiment, max_principle_estimate, mutational_loss_g
from .model import (
    FitnessProfile,
    Interval,
    ModelSpec,
    MutationKernel,
    RealLine,
    hille_tamarkin_norm,
    loss_function,
    scaling_family,
    total_mutation_rate,
    validate_model,
)
from .quadrature import Partition, apply, mesh_width, refine, uniform_partition

__version__ = "0.1.0"

__all__ = [
    "BENCHMARKS",
    "DiscreteOperator",
    "EigenResult",
    "EquilibriumSolver",
    "FitnessProfile",
    "Interval",
    "ModelSpec",
    "MutationKernel",
    "Partition",
    "RealLine",
    "SolverConfig",
    "StepDensity",
    "apply",
    "cross_method_compare",
    "embed_density",
    "galerkin_matrices",
    "hille_tamarkin_norm",
    "house_of_cards_oracle",
    "k_alpha_matrix",
    "locality_experiment",
    "loss_function",
    "max_principle_estimate",
    "mesh_width",
    "mutational_loss_g",
    "nystrom_matrices",
    "oracle_compare",
    "perron_eigenpair",
    "refine",
    "refinement_study",
    "residual",
    "scaling_family",
    "solve_via_bisection",
    "spectral_radius",
    "total_mutation_rate",
    "tv_distance",
    "uniform_partition",
    "validate_model",
]
