"""Grad-div penalty route to incompressible Navier-Stokes on the torus.

The package integrates the viscous system with an exact exponential
propagator for the linear elastic (shear + grad-div) part, drives the
penalty constant to large values to approximate incompressible flow with
pressure recovered from the divergence, and evaluates the free-space
fundamental solution of the linear system together with empirical
Gaussian-bound reports.
"""

__version__ = "0.1.0"

from .spectral import (
    Grid,
    ModeProjector,
    ScalarField,
    VectorField,
    dealias,
    divergence,
    gradient,
    l2_diff,
    l2_norm,
    l2_norm_sq,
    make_grid,
    project_solenoidal,
    to_physical,
    to_spectral,
)
from .semigroup import (
    LameParams,
    PropagatorSymbol,
    apply_semigroup,
    poisson_psi,
    propagator_symbol,
    semigroup_via_representation,
    smoothing_ratio,
)
from .stepper import (
    BlowUpDetected,
    NonPositiveTheta,
    PicardDiverged,
    StepDiagnostics,
    StepTooSmall,
    StepperConfig,
    Trajectory,
    cole_hopf_oracle,
    duhamel_step,
    integrate,
    nonlinear_term,
)
from .penalty import (
    InsufficientEntries,
    SweepEntry,
    SweepReport,
    extrapolate_lambda,
    lambda_sweep,
    pressure_from_divergence,
    reference_ns_solve,
)
from .kernels import (
    BoundFitReport,
    KernelPoint,
    SampleSpec,
    green_matrix_symbol,
    newtonian_constant,
    verify_gaussian_bound,
    w_function,
    z_kernel,
)
from .diagnostics import (
    DiagnosticSeries,
    energy_identity_residual,
    gronwall_envelope,
    hk_inequality_check,
    sobolev_norm_sq,
)

__all__ = [name for name in dir() if not name.startswith("_")]
