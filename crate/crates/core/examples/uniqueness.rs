//! Newton from several scaled copies of a continuation solution lands on the
//! same graph.

use std::sync::Arc;

use sigmak::{uniqueness_probe, Prescription, SolverOptions, SpaceFormModel, SphereGrid};

fn main() -> sigmak::Result<()> {
    let psi = Prescription::anisotropic(Prescription::round_target(1.0, 4.0, 2)?, 0.2, [0.0, 0.0, 1.0])?;
    let grid = Arc::new(SphereGrid::new(16, 32)?);
    let seeds = [0.9, 0.95, 1.05, 1.1];
    let spread = uniqueness_probe(&SpaceFormModel::euclidean(), &psi, 2, grid, &SolverOptions::default(), &seeds)?;
    println!("seeds {seeds:?}: max deviation between solutions {spread:.3e}");
    Ok(())
}
