//! Non-round solution of `σ₂(κ) = ψ` for `ψ = q(1)²·φ(ρ)^{-4}·(1 + ε⟨ν, E⟩)`
//! in Euclidean space, on two grids.
//!
//! ```text
//! cargo run --release --example anisotropic [eps] [n_theta]
//! ```

use std::sync::Arc;
use std::time::Instant;

use sigmak::{continuity_solve, Prescription, SolverOptions, SpaceFormModel, SphereGrid};

fn main() -> sigmak::Result<()> {
    let mut args = std::env::args().skip(1);
    let eps: f64 = args.next().map_or(Ok(0.2), |a| a.parse()).expect("eps must be a number");
    let n_theta: usize = args.next().map_or(Ok(32), |a| a.parse()).expect("n_theta must be an integer");

    let model = SpaceFormModel::euclidean();
    let base = Prescription::round_target(1.0, 4.0, 2)?;
    let psi = Prescription::anisotropic(base, eps, [0.0, 0.0, 1.0])?;

    for n in [n_theta, 2 * n_theta] {
        let grid = Arc::new(SphereGrid::new(n, 2 * n)?);
        let start = Instant::now();
        let sol = continuity_solve(&model, &psi, 2, grid, &SolverOptions::default())?;
        let m = sol.report.last().expect("a converged report has monitors");
        println!(
            "{n:>3}x{:<3} newton={:<3} residual={:.2e} rho=[{:.8}, {:.8}] grad_inf={:.6} kappa_max={:.6} u_min={:.6} ({:.1?})",
            2 * n,
            sol.report.iterations,
            sol.report.residual_inf,
            m.rho_min,
            m.rho_max,
            m.grad_inf,
            m.kappa_max,
            m.u_min,
            start.elapsed()
        );
    }
    Ok(())
}
