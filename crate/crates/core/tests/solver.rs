use std::sync::Arc;

use sigmak::solver::jacobian;
use sigmak::{
    newton_solve, uniqueness_probe, Prescription, ScalarField, SolverOptions, SpaceFormModel, SphereGrid,
};

fn grid(nt: usize) -> Arc<SphereGrid> {
    Arc::new(SphereGrid::new(nt, 2 * nt).unwrap())
}

#[test]
fn hyperbolic_newton_from_far_seed() {
    let h = SpaceFormModel::hyperbolic();
    let psi = Prescription::constant((1.0 / 0.5f64.tanh()).powi(2)).unwrap();
    let sol = newton_solve(&h, &ScalarField::constant(grid(12), 0.8), &psi, 2, &SolverOptions::default()).unwrap();
    assert!(sol.rho.values().iter().all(|r| (r - 0.5).abs() < 1e-6));
    assert!(sol.report.converged);
}

#[test]
fn constructed_target_from_low_seed() {
    let e = SpaceFormModel::euclidean();
    let psi = Prescription::round_target(1.5, 4.0, 2).unwrap();
    let sol = newton_solve(&e, &ScalarField::constant(grid(12), 1.2), &psi, 2, &SolverOptions::default()).unwrap();
    assert!(sol.rho.values().iter().all(|r| (r - 1.5).abs() < 1e-8));
    let m = sol.report.last().unwrap();
    assert!((m.rho_min - 1.5).abs() < 1e-8 && (m.rho_max - 1.5).abs() < 1e-8);
    assert!((m.kappa_max - 2.0 / 3.0).abs() < 1e-8);
    assert!(sol.report.monitors.iter().all(|m| m.u_min > 0.0 && m.kappa_max.is_finite()));
}

#[test]
fn uniqueness_for_constructed_target() {
    let e = SpaceFormModel::euclidean();
    let psi = Prescription::round_target(1.5, 4.0, 2).unwrap();
    let d = uniqueness_probe(&e, &psi, 2, grid(12), &SolverOptions::default(), &[1.1, 1.5, 1.9]).unwrap();
    assert!(d < 1e-8, "{d}");
}

#[test]
fn uniqueness_for_small_anisotropy() {
    let e = SpaceFormModel::euclidean();
    let psi = Prescription::anisotropic(Prescription::round_target(1.0, 4.0, 2).unwrap(), 0.05, [1.0, 0.0, 1.0]).unwrap();
    let d = uniqueness_probe(&e, &psi, 2, grid(12), &SolverOptions::default(), &[0.9, 1.1]).unwrap();
    assert!(d < 1e-6, "{d}");
}

#[test]
fn constant_targets_share_the_curvature_jacobian() {
    let g = grid(10);
    let rho = ScalarField::from_fn(g, |t, p| 0.7 + 0.03 * t.cos() + 0.02 * t.sin() * p.sin()).unwrap();
    let opts = SolverOptions::default();
    for model in [SpaceFormModel::hyperbolic(), SpaceFormModel::euclidean(), SpaceFormModel::spherical()] {
        let a = jacobian(&model, &rho, &Prescription::constant(1.0).unwrap(), 2, &opts).unwrap();
        let b = jacobian(&model, &rho, &Prescription::constant(7.5).unwrap(), 2, &opts).unwrap();
        let scale = a.vals.iter().fold(0.0f64, |m, v| m.max(v.abs()));
        let diff = a.vals.iter().zip(&b.vals).fold(0.0f64, |m, (x, y)| m.max((x - y).abs()));
        assert_eq!(a.col_idx, b.col_idx);
        assert!(diff <= 1e-8 * scale, "{diff} vs {scale}");
    }
}
