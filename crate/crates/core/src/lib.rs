//! Numerical workbench for the prescribed σ_k curvature equation
//!
//! ```text
//!     σ_k(κ(X)) = ψ(V, ν)
//! ```
//!
//! for starshaped radial graphs `{(z, ρ(z)) : z ∈ S²}` in the Euclidean,
//! spherical and hyperbolic space forms.
//!
//! The crate is organised bottom-up:
//!
//! * [`spaceform`]: warping data `φ, φ′, Φ, q` of the ambient model.
//! * [`grid`]: the latitude–longitude discretization of `S²` and second-order
//!   covariant derivatives with cross-pole ghost rows.
//! * [`geometry`]: induced metric, normal, second fundamental form, principal
//!   curvatures and support function of a radial graph, plus discrete checks
//!   of the classical identities for `Φ` and `u`.
//! * [`algebra`]: elementary symmetric functions, their derivatives and the
//!   Gårding cones `Γ_k`.
//! * [`prescription`]: right-hand sides `ψ` and checkers for the barrier and
//!   radial monotonicity conditions.
//! * [`solver`]: residual, colored finite-difference Jacobian, damped Newton
//!   constrained to `Γ_k`, and homotopy continuation from a round sphere.
//! * [`workbench`]: configuration files, node tables, meshes and reports used
//!   by the `sigmak` binary.

pub mod algebra;
pub mod geometry;
pub mod grid;
pub mod prescription;
pub mod solver;
pub mod spaceform;
pub mod workbench;

mod parallel;

pub use algebra::{in_gamma_cone, normalized_f, sigma, sigma_partial};
pub use geometry::{assemble, starshape_margin, GeometryState, NodeGeometry};
pub use grid::{covariant_jet, CovariantJet, ScalarField, SphereGrid};
pub use parallel::SERIAL_ENV;
pub use prescription::{ConditionReport, Prescription};
pub use solver::{
    continuity_solve, newton_solve, residual, uniqueness_probe, Solution, SolveFailure,
    SolveReport, SolverOptions,
};
pub use spaceform::{Curvature, SpaceFormModel};

use std::path::PathBuf;

/// Dimension `n` of the hypersurfaces: graphs over `S²`.
pub const SURFACE_DIM: usize = 2;

pub type Result<T> = std::result::Result<T, Error>;

#[derive(Debug, thiserror::Error)]
pub enum Error {
    #[error("radius {rho} outside the radial domain (0, {end})")]
    Domain { rho: f64, end: f64 },

    #[error("invalid grid: {0}")]
    Grid(String),

    #[error("invalid argument: {0}")]
    InvalidArgument(String),

    #[error("degenerate geometry at node (theta={theta:.6}, phi={phi:.6}): {reason}")]
    Geometry {
        theta: f64,
        phi: f64,
        reason: String,
    },

    #[error("initial field is not {k}-admissible (min cone slack {slack:e})")]
    NotAdmissible { k: usize, slack: f64 },

    #[error("no convergence: {}", .0.reason)]
    NoConvergence(Box<SolveFailure>),

    #[error("left the admissible cone: {}", .0.reason)]
    ConeBreach(Box<SolveFailure>),

    #[error("singular linear system at pivot {0}")]
    Singular(usize),

    #[error("config error: {0}")]
    Config(String),

    #[error("{path}: {source}")]
    Io {
        path: PathBuf,
        source: std::io::Error,
    },
}
