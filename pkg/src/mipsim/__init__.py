"""mipsim: a simulation laboratory for moderately interacting particle
systems and their nonlinear Fokker-Planck limits.

The package couples three layers:

* a validated kernel catalog (Riesz / Coulomb / Biot-Savart /
  Keller-Segel / attractive-repulsive / zero) with admissibility
  reports and closed-form convergence-rate calculators;
* a pseudo-spectral reference solver for the limiting PDE on a periodic
  box, with mass-conservation and blow-up guards;
* an Euler-Maruyama particle engine plus Monte-Carlo harnesses that
  measure empirical-density convergence rates and shared-noise coupling
  gaps against the reference solution, reproducibly across thread
  counts.
"""

from .config import ExperimentConfig, config_echo, parse_config, parse_config_text
from .cutoff import CutoffFn, eval_cutoff
from .errors import (
    BadMixture,
    BlowUpDetected,
    BumpUnderresolved,
    ConfigError,
    DeltaOutOfRange,
    DivergentNorm,
    DomainError,
    EmptyWindow,
    MipsimError,
    NoConvergence,
    NonProbability,
    NotCompleted,
    OutOfCatalog,
    QuadratureFailure,
    UnsupportedSymbol,
)
from .grid import GridField, coordinate_axis, gaussian_field
from .harness import (
    ChaosReport,
    RateReport,
    auto_cutoff,
    chaos_coupling,
    grid_mixture,
    rate_sweep,
    reference_run,
)
from .kernels import (
    AssumptionReport,
    KernelSpec,
    assumption_report,
    eval_kernel,
    fourier_symbol,
    kernel_norms,
    lemma1_constant,
)
from .measures import (
    WeightedPointSet,
    bessel_norm,
    deposit_uN,
    kr_distance,
    kr_distance_lp,
    l1_cap_lr,
    lp_norm,
)
from .mollifier import (
    ForceTable,
    MollifierSpec,
    build_force_table,
    convolved_force_magnitude,
    eval_V,
    eval_VN,
    interaction_force,
)
from .particles import (
    ParticleState,
    SimResult,
    drift_direct,
    drift_grid,
    em_step,
    sample_initial,
    simulate,
)
from .rates import (
    BestAlpha,
    RateQuery,
    RateValue,
    SobolevRate,
    best_alpha,
    sobolev_rate_exponent,
    theoretical_rate,
    theoretical_rate_singular,
)
from .rng import box_muller, stream
from .spectral import (
    PdeRun,
    compute_cutoff_A,
    flux_divergence,
    heat_propagate,
    kernel_convolution,
    pde_step,
    solve_pde,
)

__version__ = "0.1.0"

__all__ = [
    "__version__",
    # configuration
    "ExperimentConfig",
    "config_echo",
    "parse_config",
    "parse_config_text",
    # errors
    "MipsimError",
    "OutOfCatalog",
    "DomainError",
    "UnsupportedSymbol",
    "DivergentNorm",
    "QuadratureFailure",
    "BumpUnderresolved",
    "NonProbability",
    "NoConvergence",
    "BadMixture",
    "BlowUpDetected",
    "NotCompleted",
    "DeltaOutOfRange",
    "EmptyWindow",
    "ConfigError",
    # kernels
    "KernelSpec",
    "AssumptionReport",
    "assumption_report",
    "eval_kernel",
    "fourier_symbol",
    "kernel_norms",
    "lemma1_constant",
    # grid and measures
    "GridField",
    "coordinate_axis",
    "gaussian_field",
    "WeightedPointSet",
    "deposit_uN",
    "lp_norm",
    "l1_cap_lr",
    "bessel_norm",
    "kr_distance",
    "kr_distance_lp",
    # mollifier and cutoff
    "MollifierSpec",
    "ForceTable",
    "eval_V",
    "eval_VN",
    "build_force_table",
    "convolved_force_magnitude",
    "interaction_force",
    "CutoffFn",
    "eval_cutoff",
    # spectral solver
    "PdeRun",
    "solve_pde",
    "pde_step",
    "heat_propagate",
    "kernel_convolution",
    "flux_divergence",
    "compute_cutoff_A",
    # particles
    "ParticleState",
    "SimResult",
    "simulate",
    "em_step",
    "drift_direct",
    "drift_grid",
    "sample_initial",
    # harness
    "RateReport",
    "ChaosReport",
    "rate_sweep",
    "chaos_coupling",
    "reference_run",
    "grid_mixture",
    "auto_cutoff",
    # rate formulas
    "RateQuery",
    "RateValue",
    "BestAlpha",
    "SobolevRate",
    "theoretical_rate",
    "theoretical_rate_singular",
    "best_alpha",
    "sobolev_rate_exponent",
    # rng
    "stream",
    "box_muller",
]
