"""nematicflow: finite-difference solver and verification harness for a
simplified nematic liquid crystal flow model (incompressible Navier-Stokes
coupled to harmonic-map heat flow for a unit director field).

The solution construction is a global-in-time Picard iteration alternating
a linear Stokes solve and a lifted heat solve on frozen nonlinear forcings,
with contraction monitoring, norm-functional diagnostics, unit-sphere drift
tracking, and a windowed small-data driver.
"""

from .elliptic import EllipticSolveOptions
from .errors import (
    BlowUp,
    ConfigError,
    DivergenceResidualExceeded,
    IncompatibleRHS,
    InvalidScenario,
    NoConvergence,
    NonConvergence,
    SolverError,
    TraceIncompatibility,
)
from .forcing import director_forcing, elastic_stress, ginzburg_term, momentum_forcing
from .grid import (
    GridSpec,
    ScalarField,
    StateSnapshot,
    VectorField,
    scalar_from_function,
    vector_from_function,
)
from .norms import (
    HFunctionalAccumulator,
    NormConfig,
    NormReport,
    divergence_residual,
    energy,
    h_functional,
    lp_time_norm,
    lq_norm,
    proxy_trace_norm,
    unit_drift,
    w2q_norm,
)
from .operators import advect, divergence, gradient, hessian_contract, laplacian
from .parabolic import ParabolicProblem, harmonic_extension, heat_solve
from .picard import picard_sweep, solve_global_smalldata, solve_local, solve_marching
from .scenarios import equilibrium_state, perturbed_state, twisted_state
from .stokes import StokesProblem, pressure_poisson, stokes_solve
from .trajectory import (
    PicardTrace,
    SolveConfig,
    SolveMode,
    SweepRecord,
    Trajectory,
    constant_trajectory,
    difference_trajectory,
)

__version__ = "0.1.0"
