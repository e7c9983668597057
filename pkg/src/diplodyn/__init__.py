"""Adaptive dynamics of diploid, single-locus Mendelian populations.

Layers, each cross-validated against the next:

- model: trait space, genotypes, demographic coefficient functions.
- ibm: exact event-driven simulation of the individual-based process.
- dynamics: logistic and three-genotype deterministic limits.
- geometry: neutral fixed-point line and perturbed zero-curve analysis.
- tss: trait substitution sequence on the mutational time scale.
- canonical: canonical equation of adaptive dynamics (three forms).
- invasion: branching approximation and invasion probability experiments.
"""

__version__ = "0.1.0"

from .model import (
    ConfigError,
    DemographyModel,
    DomainError,
    GaussianKernelParams,
    Genotype,
    MutationLaw,
    TraitSpace,
    build_model,
    gaussian_competition,
)
from .ibm import (
    EventRecord,
    PopulationState,
    StopRule,
    Trajectory,
    birth_event,
    death_rate,
    monomorphic_state,
    simulate,
    step,
    total_event_rate,
)
from .dynamics import (
    DimorphicModel,
    NphCoordinates,
    average_phenotype_series,
    carrying_capacity,
    from_nph,
    genotype_rhs,
    integrate_flow,
    invasion_fitness,
    jacobian_spectrum_at_AA,
    jacobian_spectrum_at_aa,
    logistic_rhs,
    to_nph,
)
from .geometry import (
    NeutralGeometry,
    count_zeros_near_curve,
    g_limit,
    reduced_field,
    scan_zero_curve,
    zero_curve,
)
from .tss import (
    SingularStrategy,
    TssState,
    find_singular_strategies,
    jump_rate_density,
    m1_modulus,
    sample_jump,
    sample_steps,
    simulate_tss,
    total_jump_rate,
)
from .canonical import (
    canonical_rhs_general,
    canonical_rhs_phenotypic,
    canonical_rhs_symmetric,
    fitness_gradient,
    integrate_canonical,
)
from .invasion import (
    BranchingSpec,
    ExtinctionState,
    InvasionEstimate,
    PhaseSplit,
    exit_time_scaling,
    extinction_fixed_point,
    extinction_ode_rhs,
    integrate_extinction,
    monte_carlo_invasion,
    simulate_branching,
    survival_probability,
    three_phase_split,
)
from .scenario import Scenario, load_scenario, scenario_from_dict
