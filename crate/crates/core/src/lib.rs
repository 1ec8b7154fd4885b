//! Simulation and control toolkit for nonlocal reaction-diffusion epidemic
//! systems on rectangular habitats.
//!
//! The crate covers four layers:
//!
//! * [`grid`] — spatial discretization: tensor grids, the diffusion operator
//!   with third-type (Robin) boundary conditions, quadrature-weighted nonlocal
//!   kernel matrices, and control subregions with boundary facet data.
//! * [`models`] — forces of infection and the right-hand sides of every model
//!   variant (core man-environment system, feedback-controlled and seasonal
//!   variants, malaria, Kendall-type nonlocal SIR).
//! * [`integrator`] — IMEX time stepping (implicit diffusion, explicit
//!   reaction), trajectory storage, decay-rate measurement and steady states.
//! * [`spectral`] / [`control`] — principal-eigenvalue machinery (direct,
//!   logistic-dynamics and period-map routes), stabilizability certificates,
//!   adjoint states, translation shape derivatives and the region-placement
//!   optimizer.
//!
//! [`scenario`] ties everything to a JSON scenario schema, and [`runner`]
//! executes the subcommands of the `epiregion` command-line tool on loaded
//! scenarios.

pub mod control;
pub mod grid;
pub mod integrator;
pub mod models;
pub mod runner;
pub mod scenario;
pub mod spectral;

pub use grid::Domain;
pub use scenario::Scenario;

/// Top-level error of the crate, aggregating every module's failure modes.
#[derive(Debug, thiserror::Error)]
pub enum Error {
    #[error(transparent)]
    Grid(#[from] grid::GridError),
    #[error(transparent)]
    Model(#[from] models::ModelError),
    #[error(transparent)]
    Integrator(#[from] integrator::IntegratorError),
    #[error(transparent)]
    Spectral(#[from] spectral::SpectralError),
    #[error(transparent)]
    Control(#[from] control::ControlError),
    #[error(transparent)]
    Scenario(#[from] scenario::ScenarioError),
    #[error("i/o error: {0}")]
    Io(#[from] std::io::Error),
}
