//! Time evolution: the κ-smoothed nonlinear problem, the ε–κ linear problem
//! and its sub-solvers, the fixed-point construction, and an independent
//! integrator for the magnetic field.

mod frozen;
mod iteration;
mod linear;
mod state;
mod stepper;

pub use frozen::{evolve_b_along, evolve_b_direct, CoefficientProvider, HermiteSegment};
pub use iteration::{contraction_metric, fixed_point_construct, fixed_point_with_halving, IterationConfig, IterationState, Iterate};
pub use linear::{
    solve_linear_eta, solve_linear_q, solve_linear_v, step_eps_kappa, stability_bound, CoefficientSample, LinearCoefficients,
    LinearState, TimeSeries, C_STAB,
};
pub use state::{FlowState, Scheme, StepperConfig};
pub use stepper::{rhs_kappa, step, Integrator, Rhs};
