"""Crystal lattices, multidimensional zeta functions, and the random
walks they generate."""

from .graphs import (
    BaseGraph,
    CrystalLattice,
    Edge,
    LatticeError,
    LatticePoint,
    PeriodicRealization,
    betti,
    check_nondegenerate,
    edge_displacement,
    fundamental_cycles,
    in_jump_set,
    is_maximal_abelian,
    jump_vectors,
    lattice_to_config,
    load_lattice,
    locate,
    maximal_abelian_cover,
    path_displacement,
    realize,
)
from .zeta import (
    ConvergenceError,
    FiniteEulerSpec,
    FiniteWeights,
    PoissonWeights,
    PoleError,
    PolynomialEulerSpec,
    ShintaniZetaSpec,
    TruncationPolicy,
    finite_euler_eval,
    finite_euler_series,
    p_reduction,
    polynomial_euler_eval,
    primes_up_to,
    shintani_eval,
)
from .distributions import (
    CompoundPoissonLaw,
    FalsifyResult,
    GeometricFactorization,
    LatticeDistribution,
    LevyMeasure,
    characteristic_function,
    characteristic_function_grid,
    compound_poisson_law,
    falsify_cf,
    finite_support_to_shintani,
    geometric_check,
    riemann_zeta_distribution,
    sample_compound_poisson,
    sample_compound_poisson_batch,
    sample_jump,
    shintani_distribution,
    stream,
)
from .walks import (
    FiniteRangeWalkSpec,
    InfiniteRangeWalkSpec,
    StepKernel,
    Trajectory,
    build_step_kernel,
    simulate,
    simulate_endpoints,
    step_finite_range,
    step_infinite_range,
    walk_cf,
)
from .verify import (
    BruteForcePmf,
    CfComparison,
    brute_force_cp_pmf,
    compare_cf,
    empirical_cf,
    sampler_vs_oracle,
)
from . import presets

__version__ = "0.1.0"
