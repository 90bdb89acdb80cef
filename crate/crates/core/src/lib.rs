//! Explicit stabilized Chebyshev time integrators for stiff semilinear
//! parabolic S(P)DEs in one space dimension.
//!
//! The crate is organized around the pipeline used by the strong-convergence
//! experiments:
//!
//! * [`chebyshev`] — first/second-kind Chebyshev polynomials and the damped
//!   stability functions `A_s`, `B_s` of the stabilized methods.
//! * [`spatial`] — tridiagonal finite-difference discretization of
//!   `div(a grad u)` on `(0,1)` with Dirichlet conditions, plus a dense
//!   spectral decomposition used by oracles and the verifier.
//! * [`noise`] — counter-based sampling of Q-Wiener increments on the grid
//!   with exact refinement coupling between step-size levels.
//! * [`integrators`] — the SK-ROCK stage recursion, its variant, and the
//!   implicit/explicit Euler reference steppers, with automatic stage
//!   selection under the stability condition `tau * lambda_max <= L_s`.
//! * [`verify`] — numerical scans of the abstract stability conditions the
//!   convergence theory rests on.
//! * [`experiments`] — Monte Carlo strong-convergence studies with coupled
//!   reference solutions and log-log slope fits.

pub mod chebyshev;
pub mod experiments;
pub mod integrators;
pub mod noise;
pub mod spatial;
pub mod verify;

pub use chebyshev::{cheb_t, cheb_u, ChebyshevError, ChebyshevParams, MethodKind};
pub use experiments::{
    fit_slope, run_regular_noise, run_spatial_convergence, run_strong_convergence,
    ConvergenceCell, ConvergenceReport, EquationPreset, ExperimentError, ExperimentPlan, SlopeFit,
};
pub use integrators::{
    integrate, select_stages, IntegrateError, SolveConfig, StageCoefficients, StagePolicy,
    Stepper, Trajectory,
};
pub use noise::{
    apply_diffusion, sample_increment, NoiseError, NoiseGenerator, NoisePath, NoiseSpec,
    NoiseStructure,
};
pub use spatial::{DiscreteOperator, SpatialError, SpectralDecomposition};
pub use verify::{ConditionId, ConditionReport, ScanConfig, ScanMethod};
