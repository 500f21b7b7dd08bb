//! Newton recovers the round sphere `ρ ≡ r` of `σ₂(κ) = q(r)²` in every model,
//! started from the constant seed `1.3·r`.

use std::sync::Arc;

use sigmak::{newton_solve, Prescription, ScalarField, SolverOptions, SpaceFormModel, SphereGrid};

fn main() -> sigmak::Result<()> {
    let grid = Arc::new(SphereGrid::new(16, 32)?);
    for (model, r) in [
        (SpaceFormModel::hyperbolic(), 0.5),
        (SpaceFormModel::euclidean(), 1.0),
        (SpaceFormModel::spherical(), 0.6),
    ] {
        let psi = Prescription::constant(model.q(r)?.powi(2))?;
        let seed = ScalarField::constant(grid.clone(), 1.3 * r);
        let sol = newton_solve(&model, &seed, &psi, 2, &SolverOptions::default())?;
        let err = sol.rho.values().iter().map(|x| (x - r).abs()).fold(0.0, f64::max);
        println!(
            "K = {:+}: r = {r}, iterations = {}, max |rho - r| = {err:.2e}, residual trace = {:?}",
            model.curvature().sign(),
            sol.report.iterations,
            sol.report.residual_trace.iter().map(|x| format!("{x:.1e}")).collect::<Vec<_>>()
        );
    }
    Ok(())
}
