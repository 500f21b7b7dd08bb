//! Property suites run by `sigmak verify`.

use std::sync::Arc;

use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;

use crate::algebra::{sigma, sigma_partial};
use crate::geometry::{
    assemble, codazzi_residual, hessian_of_primitive_residual, support_gradient_residual,
    support_hessian_residual, IdentityOptions,
};
use crate::grid::{refinement_order, ScalarField, SphereGrid};
use crate::prescription::Prescription;
use crate::solver::{jacobian_consistency, residual, SolverOptions};
use crate::spaceform::SpaceFormModel;
use crate::Result;

use super::config::RunConfig;

/// Outcome of one property with its measured quantities.
#[derive(Debug, Clone, PartialEq)]
pub struct Property {
    pub name: String,
    pub pass: bool,
    pub details: Vec<(String, f64)>,
}

impl Property {
    fn new(name: impl Into<String>, pass: bool, details: Vec<(&str, f64)>) -> Self {
        Self {
            name: name.into(),
            pass,
            details: details.into_iter().map(|(k, v)| (k.to_string(), v)).collect(),
        }
    }
}

type IdentityCheck = fn(&SpaceFormModel, &ScalarField, &IdentityOptions) -> Result<f64>;

pub const IDENTITY_CHECKS: [(&str, IdentityCheck); 4] = [
    ("hessian_of_primitive", hessian_of_primitive_residual),
    ("support_gradient", support_gradient_residual),
    ("support_hessian", support_hessian_residual),
    ("codazzi", codazzi_residual),
];

/// The two test graphs of the refinement study.
pub const IDENTITY_FIELDS: [(&str, fn(f64, f64) -> f64); 2] = [
    ("axisymmetric", |t, _| 1.0 + 0.1 * t.cos()),
    ("tilted", |t, p| 1.0 + 0.05 * t.sin() * p.cos()),
];

/// Accepted error reduction per grid doubling for a second-order method.
pub const RATIO_RANGE: (f64, f64) = (3.0, 5.0);

pub fn models() -> [SpaceFormModel; 3] {
    [
        SpaceFormModel::hyperbolic(),
        SpaceFormModel::euclidean(),
        SpaceFormModel::spherical(),
    ]
}

fn model_tag(m: &SpaceFormModel) -> String {
    format!("K{}", m.curvature().sign())
}

fn identity_properties(cfg: &RunConfig) -> Result<Vec<Property>> {
    let opts = IdentityOptions {
        christoffel_sign: if cfg.inject_christoffel_bug { -1.0 } else { 1.0 },
    };
    let mut out = Vec::new();
    for model in models() {
        for (field, f) in IDENTITY_FIELDS {
            for (check, run) in IDENTITY_CHECKS {
                let ord = refinement_order(cfg.n_theta, cfg.n_phi, |g| run(&model, &ScalarField::from_fn(g, f)?, &opts))?;
                let ratio = ord.ratio().unwrap_or(f64::NAN);
                out.push(Property::new(
                    format!("identity.{check}.{}.{field}", model_tag(&model)),
                    ord.ratio_within(RATIO_RANGE.0, RATIO_RANGE.1),
                    vec![
                        ("order", ord.order().unwrap_or(f64::NAN)),
                        ("ratio", ratio),
                        ("coarse_error", ord.coarse_error),
                        ("fine_error", ord.fine_error),
                    ],
                ));
            }
        }
    }
    Ok(out)
}

/// Sum rule, Euler relation and subset enumeration on random `λ ∈ [−1, 1]^n`, `n ≤ 8`.
pub fn algebra_properties(samples: usize, seed: u64) -> Vec<Property> {
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    let (mut brute, mut sum_rule, mut euler) = (0.0f64, 0.0f64, 0.0f64);
    for _ in 0..samples {
        let n = rng.gen_range(1..=8);
        let k = rng.gen_range(1..=n);
        let l: Vec<f64> = (0..n).map(|_| rng.gen_range(-1.0..1.0)).collect();
        let d = sigma_partial(&l, k);
        let s = sigma(&l, k);
        brute = brute.max((s - subset_sum(&l, k)).abs());
        sum_rule = sum_rule.max((d.iter().sum::<f64>() - (n - k + 1) as f64 * sigma(&l, k - 1)).abs());
        euler = euler.max((l.iter().zip(&d).map(|(a, b)| a * b).sum::<f64>() - k as f64 * s).abs());
    }
    let tol = 1e-12;
    vec![
        Property::new("algebra.subset_enumeration", brute < tol, vec![("max_error", brute)]),
        Property::new("algebra.sum_rule", sum_rule < tol, vec![("max_error", sum_rule)]),
        Property::new("algebra.euler_relation", euler < tol, vec![("max_error", euler)]),
    ]
}

/// `σ_k` as the sum over all `k`-element subsets.
pub fn subset_sum(l: &[f64], k: usize) -> f64 {
    (0u32..1 << l.len())
        .filter(|m| m.count_ones() as usize == k)
        .map(|m| (0..l.len()).filter(|i| m & (1 << i) != 0).map(|i| l[i]).product::<f64>())
        .sum()
}

/// A radius comfortably inside the domain of every model.
fn base_radius(model: &SpaceFormModel) -> f64 {
    0.6f64.min(0.4 * model.domain_end())
}

/// `ρ = r(1 + Σ c_lm Y)` with small random coefficients on a few low modes.
pub fn random_smooth_field(grid: Arc<SphereGrid>, radius: f64, rng: &mut ChaCha8Rng) -> Result<ScalarField> {
    let c: Vec<f64> = (0..6).map(|_| rng.gen_range(-0.04..0.04)).collect();
    ScalarField::from_fn(grid, |t, p| {
        radius
            * (1.0
                + c[0] * t.cos()
                + c[1] * t.sin() * p.cos()
                + c[2] * t.sin() * p.sin()
                + c[3] * (3.0 * t.cos().powi(2) - 1.0)
                + c[4] * t.sin().powi(2) * (2.0 * p).cos()
                + c[5] * t.sin() * t.cos() * p.sin())
    })
}

fn solver_properties(cfg: &RunConfig) -> Result<Vec<Property>> {
    let model = cfg.model;
    let r = base_radius(&model);
    let mut rng = ChaCha8Rng::seed_from_u64(cfg.verify_seed);
    let grid = Arc::new(SphereGrid::new(12, 24)?);
    let psi = Prescription::anisotropic(Prescription::radial_power(1.0, 3.0)?, 0.3, [0.3, -0.2, 1.0])?;
    let mut out = Vec::new();

    let rho = random_smooth_field(grid.clone(), r, &mut rng)?;
    let radial = Prescription::radial_power(1.0, 3.0)?;
    let base = residual(&model, &rho, &radial, cfg.k)?;
    let mut exact = true;
    for shift in [1, 7, grid.n_phi() / 2] {
        exact &= residual(&model, &rho.rotate_phi(shift), &radial, cfg.k)?.values() == base.rotate_phi(shift).values();
    }
    out.push(Property::new("residual.rotation_equivariance", exact, vec![]));

    let mut worst = 0.0f64;
    for _ in 0..3 {
        let rho = random_smooth_field(grid.clone(), r, &mut rng)?;
        let dir: Vec<f64> = (0..grid.len()).map(|_| rng.gen_range(-1.0..1.0)).collect();
        worst = worst.max(jacobian_consistency(&model, &rho, &psi, cfg.k, &SolverOptions::default(), &dir)?);
    }
    out.push(Property::new("jacobian.directional_oracle", worst < 1e-5, vec![("max_relative_error", worst)]));

    let target = Prescription::round_target(r, 4.0, cfg.k)?;
    let round = residual(&model, &ScalarField::constant(grid.clone(), r), &target, cfg.k)?.max_abs();
    out.push(Property::new("residual.round_sphere", round < 1e-12, vec![("residual_inf", round)]));

    let e = SpaceFormModel::euclidean();
    let rho = random_smooth_field(grid.clone(), 1.0, &mut rng)?;
    let scaled = ScalarField::new(grid.clone(), rho.values().iter().map(|x| 3.0 * x).collect())?;
    let (a, b) = (assemble(&e, &rho)?, assemble(&e, &scaled)?);
    let scaling = a
        .nodes
        .iter()
        .zip(&b.nodes)
        .map(|(x, y)| (sigma(&y.kappa, 2) - sigma(&x.kappa, 2) / 9.0).abs())
        .fold(0.0, f64::max);
    out.push(Property::new("geometry.euclidean_scaling", scaling < 1e-13, vec![("max_error", scaling)]));
    Ok(out)
}

/// All suites: identity refinement on `grid → 2·grid`, algebra identities,
/// rotation equivariance, the Jacobian oracle, round spheres and scaling.
pub fn run_suites(cfg: &RunConfig) -> Result<Vec<Property>> {
    let mut out = identity_properties(cfg)?;
    out.extend(algebra_properties(cfg.verify_samples, cfg.verify_seed));
    out.extend(solver_properties(cfg)?);
    Ok(out)
}
