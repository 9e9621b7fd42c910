"""Steady-state Poisson-Nernst-Planck solver with steric interactions.

Layers, from the bottom up:

* :mod:`pnp_steric.branch` - algebra of one oppositely charged ion pair:
  solution branches, critical constants, monotone segment inverses;
* :mod:`pnp_steric.rhs` - reduced Poisson right-hand sides for the
  three- and four-species charge configurations;
* :mod:`pnp_steric.bvp` - singularly perturbed boundary value solver
  with Robin data, plus structural checks (classification, envelope,
  boundary layers, linearised stability, unbounded growth);
* :mod:`pnp_steric.current` - excess electric current, evaluated by two
  independent quadrature routes that must agree;
* :mod:`pnp_steric.cli` - command line front end.
"""

from .branch import (
    CriticalSet,
    TwoSpeciesParams,
    c_diff,
    c_diff_on_segment,
    c_diff_segment_derivative,
    concentrations,
    critical_set,
    dphi_dsigma,
    g_crit,
    inverse_sigma,
    phi_crit,
    phi_on_branch,
    sigma_c,
    sigma_z,
    stability_indicator,
    unified_sigma,
)
from .bvp import (
    BvpProblem,
    BvpSolution,
    RobinBC,
    boundary_layer_limits,
    bounds_check,
    classify_solution,
    envelope_check,
    linearized_smallest_eigenvalue,
    solve,
    unbounded_growth_probe,
)
from .current import (
    CurrentProfile,
    DiffusionSet,
    generic_current,
    integral_current_sigma_four,
    integral_current_sigma_three,
    integral_current_x,
    pointwise_current_four,
    pointwise_current_three,
)
from .errors import (
    BoundsError,
    BranchMismatchError,
    ConfigError,
    ConsistencyError,
    DomainError,
    DomainEscapeError,
    EmptyDomainError,
    EndpointSingularityWarning,
    InconsistentProfileError,
    NoIntersectionError,
    NonconvergenceError,
    PnpStericError,
    RootPresentError,
    SignError,
    SubcriticalError,
    SupercriticalError,
)
from .rhs import (
    FourSpeciesConfig,
    RhsFunction,
    ThreeSpeciesConfig,
    assemble_four_species,
    assemble_three_species,
    third_species_concentration,
)

__version__ = "0.1.0"
