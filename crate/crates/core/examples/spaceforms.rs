//! Warping data of the three ambient models at a few radii.

use sigmak::SpaceFormModel;

fn main() -> sigmak::Result<()> {
    for model in [SpaceFormModel::hyperbolic(), SpaceFormModel::euclidean(), SpaceFormModel::spherical()] {
        println!("K = {:+}, radial domain (0, {:.6})", model.curvature().sign(), model.domain_end());
        println!("  {:>6} {:>12} {:>12} {:>12} {:>12}", "rho", "phi", "phi'", "Phi", "q");
        for rho in [0.25, 0.5, 1.0, 1.5] {
            if !model.contains(rho) {
                continue;
            }
            println!(
                "  {rho:>6.2} {:>12.8} {:>12.8} {:>12.8} {:>12.8}",
                model.phi(rho)?,
                model.phi_prime(rho)?,
                model.Phi(rho)?,
                model.q(rho)?
            );
        }
    }
    Ok(())
}
