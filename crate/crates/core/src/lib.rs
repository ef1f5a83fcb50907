//! Simulation of chemotactic aggregation in one space dimension.
//!
//! * [`model`]: turning response `φ`, velocity law `a` and its antiderivative `A`.
//! * [`field`]: chemoattractant `S = K * ρ`, flux and field diagnostics.
//! * [`aggregates`]: Dirac-mass dynamics with explicit Euler and merging.
//! * [`kinetic`]: two-velocity kinetic solver at finite `ε`.
//! * [`measure`]: discretization, CDFs and the Wasserstein-1 distance.
//! * [`scenario`]: initial data of the standard experiments.

pub mod aggregates;
pub mod error;
pub mod field;
pub mod kinetic;
pub mod measure;
pub mod model;
pub mod scenario;

pub use aggregates::{
    collapse_time_bound, euler_step, gamma_interval, interaction_sums, merge_collisions, simulate, velocity_rhs,
    AggregateState, MergeEvent, MergeRule, SimParams, Trajectory,
};
pub use error::{Error, Result};
pub use field::{
    check_one_sided, check_osl, field_from_aggregates, field_from_grid_density, kernel, kernel_gradient,
    macroscopic_flux, Grid1D, GridField,
};
pub use kinetic::{
    flux_comparison, kinetic_step, moments, simulate_kinetic, InitialSplit, KineticParams, KineticRun, KineticSample,
    KineticState,
};
pub use measure::{
    cdf_at, center_of_mass, deposit, discretize_density, project_density, wasserstein1, Distance, Measure1D,
};
pub use model::{ChemoModel, VelocityLaw};
pub use scenario::{scenario_density, Gaussian, Scenario};

/// Relative cell-mass threshold below which discretized cells are dropped.
pub const DEFAULT_MASS_THRESHOLD: f64 = 1e-12;

/// Margin required between the support of the data and the domain ends.
pub const DOMAIN_PADDING: f64 = 20.0;
