//! Exact evolution of relativistic strings in Minkowski space.
//!
//! Closed (or infinite) strings with Cauchy data `x = p(θ)`, `x_t = q(θ)` are
//! evolved by building the Kong–Zhang coordinates `θ = Θ(t, σ)` from
//! quadratures of the characteristic speeds `Λ±`. In those coordinates the
//! nonlinear string equations become the linear wave equation, solved exactly
//! by the d'Alembert formula.
//!
//! The [`oracle`] module holds independent brute-force solvers (a nonlinear
//! leapfrog scheme for the string equations and an upwind scheme for the
//! characteristic system) used to check the exact pipeline.

pub mod error;
pub mod evolution;
pub mod initial_data;
pub mod kz_map;
pub mod metric;
pub mod oracle;
pub mod quadrature;
pub mod report;
pub mod roots;
pub mod vector;

pub use error::{Error, Result};
pub use evolution::{
    dalembert_state, exact_trajectory, gauge_check, harmonic_check, lambda_solution,
    periodicity_check, pullback, sigma_grid, Chart, ExactSolution, PeriodReport, Provenance,
    StringState, Trajectory, Worldsheet,
};
pub use initial_data::{
    lambda_init, make_curve, uniform_grid, validate_timelike, EigenvalueField, InitialCurve,
    Presentation, Thresholds, Topology, VelocitySpec,
};
pub use kz_map::{build_rho, invert_table, kz_identity_residuals, KzMap, KzOptions, MonotoneTable};
pub use metric::{eigen_speeds, induced_metric, projection_audit, MetricSample, ProjectionCheck};
pub use report::{fit_order, ResidualReport};
