//! Barrier and radial monotonicity checks for a few right-hand sides.

use std::sync::Arc;

use sigmak::prescription::{check_barriers, check_monotonicity, normal_samples, rho_samples, Condition};
use sigmak::{Prescription, SpaceFormModel, SphereGrid};

fn show(label: &str, c: Option<Condition>) {
    if let Some(c) = c {
        println!("  {label:<14} {} margin {:+.6e} over {} samples", if c.ok { "pass" } else { "FAIL" }, c.margin, c.samples);
    }
}

fn main() -> sigmak::Result<()> {
    let grid = Arc::new(SphereGrid::new(16, 32)?);
    let e = SpaceFormModel::euclidean();
    let target = Prescription::round_target(1.5, 4.0, 2)?;
    for (r1, r2) in [(1.0, 2.0), (1.4, 1.6), (1.6, 2.0)] {
        println!("round_target(1.5, m = 4) on [{r1}, {r2}]");
        let r = check_barriers(&target, &e, 2, r1, r2, &grid)?;
        show("barrier low", r.barrier_low);
        show("barrier high", r.barrier_high);
    }

    let rs = rho_samples(0.5, 2.0, 64);
    let nus = normal_samples(&grid);
    for (name, psi) in [
        ("constant 1", Prescription::constant(1.0)?),
        ("radial power 4", Prescription::radial_power(1.0, 4.0)?),
        ("anisotropic", Prescription::anisotropic(Prescription::round_target(1.0, 4.0, 2)?, 0.2, [0.0, 0.0, 1.0])?),
    ] {
        println!("{name} on rho in [0.5, 2]");
        show("monotone", check_monotonicity(&psi, &e, 2, &rs, &nus)?.monotone);
    }
    Ok(())
}
