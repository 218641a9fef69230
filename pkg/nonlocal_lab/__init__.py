"""
Laboratory for nonlocal Dirichlet forms with weakly singular kernels.

Expose the main types and operations so callers can import them from the
package directly.
"""

# Re-export the data model and error hierarchy.
from .errors import (
    ConfigError,
    ConvergenceError,
    DomainError,
    HypothesisViolation,
    IncompatibleDataError,
    NonlocalError,
    QuadratureError,
)
from .models import (
    Ball,
    Box,
    DistributionProfile,
    Domain,
    EllSpec,
    EllVariant,
    FormMatrix,
    GridFunction,
    Interval,
    KernelSpec,
    LorentzWeight,
    QuasiBall,
    Report,
    SolveReport,
    SpectralDecomposition,
    TailSpec,
    TailVariant,
    pure_power,
)
# Re-export the numerical operations.
from .kernels import (
    check_admissible,
    continuity_modulus,
    growth_condition,
    holder_g,
    holder_mass_A,
    kernel_profile,
    levy_integral,
    mass_M,
    modulus_integral,
    modulus_omega,
    multiplier_m,
    radial_tail_mass,
    scaling_gamma,
    scaling_sigma,
    spectral_mass_g,
)
from .domain import build_grid, indicator, refine
from .forms import (
    apply_L,
    apply_L_discrete,
    apply_N,
    assemble,
    boundary_mass_profile,
    energy,
    hardy_witness,
    j_perimeter,
    operator_matrix,
)
from .spectral import berezin_bound, censored_eigen, dirichlet_eigen, h_norm, hstar_norm, spectral_apply
from .analysis import distribution_profile, lorentz_norm, lorentz_weight, rearrange
from .verify import CHECKS, verify, verify_batch
from .solve import (
    SourceSpec,
    neumann_tail,
    pohozaev_check,
    smoothing_report,
    solve_dirichlet,
    solve_dirichlet_nonhom,
    solve_neumann,
    solve_sublinear,
)
from .config import RunConfig, load_config

# Keep __all__ in sync with the public symbols above.
__all__ = [
    "ConfigError",
    "ConvergenceError",
    "DomainError",
    "HypothesisViolation",
    "IncompatibleDataError",
    "NonlocalError",
    "QuadratureError",
    "Ball",
    "Box",
    "DistributionProfile",
    "Domain",
    "EllSpec",
    "EllVariant",
    "FormMatrix",
    "GridFunction",
    "Interval",
    "KernelSpec",
    "LorentzWeight",
    "QuasiBall",
    "Report",
    "SolveReport",
    "SpectralDecomposition",
    "TailSpec",
    "TailVariant",
    "pure_power",
    "check_admissible",
    "continuity_modulus",
    "growth_condition",
    "holder_g",
    "holder_mass_A",
    "kernel_profile",
    "levy_integral",
    "mass_M",
    "modulus_integral",
    "modulus_omega",
    "multiplier_m",
    "radial_tail_mass",
    "scaling_gamma",
    "scaling_sigma",
    "spectral_mass_g",
    "build_grid",
    "indicator",
    "refine",
    "apply_L",
    "apply_L_discrete",
    "apply_N",
    "assemble",
    "boundary_mass_profile",
    "energy",
    "hardy_witness",
    "j_perimeter",
    "operator_matrix",
    "berezin_bound",
    "censored_eigen",
    "dirichlet_eigen",
    "h_norm",
    "hstar_norm",
    "spectral_apply",
    "distribution_profile",
    "lorentz_norm",
    "lorentz_weight",
    "rearrange",
    "CHECKS",
    "verify",
    "verify_batch",
    "SourceSpec",
    "neumann_tail",
    "pohozaev_check",
    "smoothing_report",
    "solve_dirichlet",
    "solve_dirichlet_nonhom",
    "solve_neumann",
    "solve_sublinear",
    "RunConfig",
    "load_config",
]
