"""growthnet: optimal growth on weighted graphs.

Capital at the n nodes of a weighted graph evolves as K' = (L+A)K - NC,
where L is the graph Laplacian, A the diagonal of node productivities, and
C the consumption chosen to maximize discounted CRRA utility. The package
computes the closed-form optimal plan from the Frobenius eigenpair of L+A,
verifies the connectivity condition under which that plan solves the
positivity-constrained problem, simulates and analyzes optimal paths, and
cross-validates the closed forms against an independent grid-based dynamic
programming solver.
"""

from .errors import AssumptionError, GrowthnetError, NumericError, ValidationError
from .hjb import GridSpec, GridValue, compare_to_explicit, solve_hjb_grid
from .network import (EconomyNetwork, build_laplacian, is_irreducible,
                      system_matrix, validate)
from .planner import (ExplicitPlan, build_plan, closed_loop_trajectory,
                      gain_of_optimal, hamiltonian, hamiltonian_maximizer,
                      nonlinear_eig_residual, optimal_control_path, phi,
                      steady_state, uncoupled_paths, value_auxiliary,
                      value_gradient, value_uncoupled)
from .simulation import (Trajectory, breakdown_time, control_budget_check,
                         convergence_time, integrate_state, make_trajectory,
                         regional_growth_rates)
from .spectral import (SpectralDecomposition, eig_symmetric, frobenius_pair,
                       two_node_closed_form)
from .two_node import (TwoNodeInstance, G_and_Psi, classification, f12_of_w,
                       thresholds, value_profile)

__version__ = "0.1.0"

__all__ = [
    "AssumptionError", "GrowthnetError", "NumericError", "ValidationError",
    "EconomyNetwork", "build_laplacian", "is_irreducible", "system_matrix",
    "validate",
    "SpectralDecomposition", "eig_symmetric", "frobenius_pair",
    "two_node_closed_form",
    "ExplicitPlan", "build_plan", "hamiltonian", "hamiltonian_maximizer",
    "phi", "nonlinear_eig_residual", "value_auxiliary", "value_gradient",
    "value_uncoupled", "uncoupled_paths", "closed_loop_trajectory",
    "optimal_control_path", "steady_state", "gain_of_optimal",
    "Trajectory", "make_trajectory", "integrate_state", "breakdown_time",
    "regional_growth_rates", "convergence_time", "control_budget_check",
    "TwoNodeInstance", "G_and_Psi", "classification", "f12_of_w",
    "thresholds", "value_profile",
    "GridSpec", "GridValue", "solve_hjb_grid", "compare_to_explicit",
    "__version__",
]
