"""Shuffled linear regression: recover an unknown row permutation and the
latent features by matching covariance eigenvectors."""

from .assignment import AssignmentResult, max_trace_assignment, spectral_match
from .baselines import leverage_match, spatial_match, threshold_match
from .metrics import (
    TrialMetrics, nmse, optimality_gap, permutation_error_rate, reconstruction_mse,
)
from .model import (
    GroundTruth, Permutation, PointCloud, SlrProblem, SolverConfig, apply_permutation,
    generate_dense_problem, generate_sparse_problem, invert,
)
from .registration import RegistrationResult, RegistrationScene, register
from .solvers import (
    LassoState, SlrSolution, oracle_solution, solve_lasso_column, solve_shuffled_lasso,
    solve_shuffled_ls,
)
from .spectral import EmptySelection, SpectralBasis, build_measurement_basis, build_signal_basis

__version__ = "0.1.0"
