"""Quasi-uniform rank-1 lattice designs: construction, diagnostics, benchmarks.

Two constructions are provided: an explicit sequence of moduli and
generating vectors from best simultaneous Diophantine approximations to
algebraic root vectors, and an exhaustive Korobov parameter search scored by
LLL-shortest vectors of the lattice and its dual.  Space-filling quality is
measured by separation radius, shortest-vector lengths, mesh-ratio bounds and
the spectral test, and designs are compared through Matern-5/2 Gaussian
process regression.
"""

__version__ = "0.1.0"

from .baselines import halton, sobol, uniform_random
from .gpr import (
    BenchmarkConfig,
    GprModel,
    HyperGrid,
    IllConditionedError,
    Matern25Params,
    fit_gpr,
    gauss_legendre,
    l2_error,
    log_marginal_likelihood,
    matern25,
    predict_mean,
    run_benchmark,
    test_function,
)
from .korobov import (
    SearchResult,
    exact_search,
    korobov_score,
    search_korobov,
)
from .kronecker import (
    AlgebraicVector,
    ApproxRecord,
    ScanLimitReached,
    algebraic_vector,
    explicit_sequence,
    fixed_root,
    kron_distance,
    next_best_approx,
)
from .lattice import (
    IntegerBasis,
    LatticeError,
    PointSet,
    RankOneLattice,
    dual_basis,
    generate_points,
    korobov_vector,
    modular_inverse,
    primal_basis,
)
from .lll import (
    OracleInfeasibleError,
    ReductionResult,
    SingularBasisError,
    exact_shortest,
    lll_reduce,
    shortest_basis_vector,
)
from .metrics import (
    DesignMetrics,
    covering_radius_estimate,
    lattice_lambda1,
    lattice_separation_radius,
    mesh_ratio_bound,
    projection_diagnostics,
    separation_radius,
    spectral_test,
)

__all__ = [name for name in dir() if not name.startswith("_")]
