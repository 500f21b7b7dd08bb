//! The ten acceptance criteria. Each prints a single `criterion N ... PASS|FAIL`
//! line; the process exits non-zero if any criterion fails.

use std::panic;
use std::path::Path;
use std::process::ExitCode;
use std::sync::{Arc, OnceLock};

use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;

use sigmak::algebra::{cone_slack, sigma, sigma_partial};
use sigmak::geometry::{assemble, IdentityOptions};
use sigmak::prescription::{check_barriers, check_monotonicity, normal_samples, rho_samples};
use sigmak::solver::jacobian_consistency;
use sigmak::workbench::verify::{models, random_smooth_field, IDENTITY_CHECKS, IDENTITY_FIELDS};
use sigmak::workbench::{cmd_check, RunConfig};
use sigmak::{
    continuity_solve, grid::refinement_order, newton_solve, uniqueness_probe, Prescription, ScalarField,
    SolveReport, SolverOptions, SpaceFormModel, SphereGrid,
};

fn verdict(n: usize, title: &str, ok: bool, detail: &str) {
    println!("criterion {n:>2} [{title}]: {} ({detail})", if ok { "PASS" } else { "FAIL" });
    assert!(ok, "criterion {n} failed: {detail}");
}

fn grid(nt: usize) -> Arc<SphereGrid> {
    Arc::new(SphereGrid::new(nt, 2 * nt).unwrap())
}

const NORTH: [f64; 3] = [0.0, 0.0, 1.0];

/// `ψ = q(1)²·φ(ρ)^{-4}·(1 + 0.2⟨ν, N⟩)` in Euclidean space.
fn anisotropic_target() -> Prescription {
    Prescription::anisotropic(Prescription::round_target(1.0, 4.0, 2).unwrap(), 0.2, NORTH).unwrap()
}

/// Radius `r*` with `σ₂(q, q) = q(r*)² = ψ`, in closed form per model.
fn round_radius(model: &SpaceFormModel, psi: f64) -> f64 {
    let q = psi.sqrt();
    match model.curvature().sign() {
        0 => 1.0 / q,
        -1 => (1.0 / q).atanh(),
        _ => (1.0 / q).atan(),
    }
}

struct Run {
    name: &'static str,
    report: SolveReport,
}

/// Solver runs shared by criteria 1, 2, 3, 7 and 8, computed once per test binary.
struct Runs {
    round: Vec<(SpaceFormModel, f64, ScalarField, SolveReport)>,
    constructed: (ScalarField, SolveReport),
    hyperbolic_aniso: (ScalarField, SolveReport),
    aniso: (ScalarField, SolveReport),
}

impl Runs {
    fn all_reports(&self) -> Vec<Run> {
        let mut out: Vec<Run> = self
            .round
            .iter()
            .map(|(_, _, _, r)| Run { name: "round sphere", report: r.clone() })
            .collect();
        out.push(Run { name: "constructed", report: self.constructed.1.clone() });
        out.push(Run { name: "hyperbolic anisotropic", report: self.hyperbolic_aniso.1.clone() });
        out.push(Run { name: "anisotropic", report: self.aniso.1.clone() });
        out
    }
}

fn hyperbolic_aniso_target() -> Prescription {
    Prescription::anisotropic(Prescription::round_target(0.5, 4.0, 2).unwrap(), 0.1, [0.3, 0.0, 1.0]).unwrap()
}

fn runs() -> &'static Runs {
    static RUNS: OnceLock<Runs> = OnceLock::new();
    RUNS.get_or_init(|| {
        let opts = SolverOptions::default();
        let round = [
            (SpaceFormModel::euclidean(), 1.0),
            (SpaceFormModel::hyperbolic(), (1.0 / 0.5f64.tanh()).powi(2)),
            (SpaceFormModel::spherical(), (1.0 / 0.6f64.tan()).powi(2)),
        ]
        .into_iter()
        .map(|(m, psi)| {
            let r = round_radius(&m, psi);
            let seed = ScalarField::constant(grid(16), 1.3 * r);
            let sol = newton_solve(&m, &seed, &Prescription::constant(psi).unwrap(), 2, &opts).unwrap();
            (m, r, sol.rho, sol.report)
        })
        .collect();
        let e = SpaceFormModel::euclidean();
        let c = continuity_solve(&e, &Prescription::round_target(1.5, 4.0, 2).unwrap(), 2, grid(16), &opts).unwrap();
        let h = continuity_solve(&SpaceFormModel::hyperbolic(), &hyperbolic_aniso_target(), 2, grid(16), &opts).unwrap();
        let a = continuity_solve(&e, &anisotropic_target(), 2, grid(32), &opts).unwrap();
        Runs {
            round,
            constructed: (c.rho, c.report),
            hyperbolic_aniso: (h.rho, h.report),
            aniso: (a.rho, a.report),
        }
    })
}

fn criterion_01_round_sphere_recovery() {
    let mut ok = true;
    let mut detail = Vec::new();
    for (m, r, rho, rep) in &runs().round {
        let err = rho.values().iter().map(|x| (x - r).abs()).fold(0.0, f64::max);
        ok &= err < 1e-8 && rep.residual_inf < 1e-10 && rep.converged;
        detail.push(format!("K={}: r*={r:.6} err={err:.1e} res={:.1e}", m.curvature().sign(), rep.residual_inf));
    }
    verdict(1, "round-sphere recovery", ok, &detail.join("; "));
}

fn criterion_02_constructed_solution() {
    let (rho, rep) = &runs().constructed;
    let err = rho.values().iter().map(|x| (x - 1.5).abs()).fold(0.0, f64::max);
    let cfg = RunConfig::parse(
        "model.K = 0\ngrid.n_theta = 16\nproblem.k = 2\npsi.family = round_target\npsi.r_bar = 1.5\npsi.m = 4\n\
         check.barriers = false\ncheck.monotonicity = true\n",
        Path::new("."),
    )
    .unwrap();
    let check = cmd_check(&cfg).unwrap();
    let margin: f64 = check.report.get("monotone_margin").unwrap().parse().unwrap();
    let ok = err < 1e-8 && rep.converged && check.status == 0 && check.report.get("monotone_ok") == Some("true") && margin > 0.0;
    verdict(2, "constructed solution", ok, &format!("|rho - 1.5| = {err:.1e}, monotone margin = {margin:.4e}, check exit {}", check.status));
}

fn criterion_03_barrier_confinement() {
    let r = runs();
    let e = SpaceFormModel::euclidean();
    let cases: [(&str, SpaceFormModel, Prescription, f64, f64, &ScalarField); 3] = [
        ("round_target r=1.5", e, Prescription::round_target(1.5, 4.0, 2).unwrap(), 1.0, 2.0, &r.constructed.0),
        ("anisotropic eps=0.2", e, anisotropic_target(), 0.85, 1.15, &r.aniso.0),
        ("hyperbolic anisotropic eps=0.1", SpaceFormModel::hyperbolic(), hyperbolic_aniso_target(), 0.4, 0.6, &r.hyperbolic_aniso.0),
    ];
    let mut ok = true;
    let mut detail = Vec::new();
    for (name, m, psi, r1, r2, rho) in cases {
        let rep = check_barriers(&psi, &m, 2, r1, r2, rho.grid()).unwrap();
        let inside = rho.min() >= r1 - 1e-6 && rho.max() <= r2 + 1e-6;
        ok &= rep.all_ok() && inside;
        detail.push(format!("{name}: barriers ok={} rho in [{:.6}, {:.6}] within [{r1}, {r2}]", rep.all_ok(), rho.min(), rho.max()));
    }
    verdict(3, "barrier confinement", ok, &detail.join("; "));
}

fn criterion_04_identity_suite() {
    let mut ok = true;
    let (mut lo, mut hi) = (f64::INFINITY, f64::NEG_INFINITY);
    for m in models() {
        for (_, f) in IDENTITY_FIELDS {
            for (name, check) in IDENTITY_CHECKS {
                let ord = refinement_order(16, 32, |g| check(&m, &ScalarField::from_fn(g, f)?, &IdentityOptions::default())).unwrap();
                let ratio = ord.ratio().unwrap_or(f64::NAN);
                if !(3.0..=5.0).contains(&ratio) {
                    ok = false;
                    println!("  {name} K={}: ratio {ratio}", m.curvature().sign());
                }
                lo = lo.min(ratio);
                hi = hi.max(ratio);
            }
        }
    }
    verdict(4, "discrete identity suite", ok, &format!("24 ratios in [{lo:.3}, {hi:.3}]"));
}

fn subset_sigma(l: &[f64], k: usize) -> f64 {
    (0u32..1 << l.len())
        .filter(|m| m.count_ones() as usize == k)
        .map(|m| (0..l.len()).filter(|i| m & (1 << i) != 0).map(|i| l[i]).product::<f64>())
        .sum()
}

fn criterion_05_algebraic_identities() {
    let mut rng = ChaCha8Rng::seed_from_u64(2024);
    let (mut sum_rule, mut euler, mut brute) = (0.0f64, 0.0f64, 0.0f64);
    for _ in 0..1000 {
        let n = rng.gen_range(1..=8);
        let k = rng.gen_range(1..=n);
        let l: Vec<f64> = (0..n).map(|_| rng.gen_range(-1.0..1.0)).collect();
        let d = sigma_partial(&l, k);
        sum_rule = sum_rule.max((d.iter().sum::<f64>() - (n - k + 1) as f64 * sigma(&l, k - 1)).abs());
        euler = euler.max((l.iter().zip(&d).map(|(a, b)| a * b).sum::<f64>() - k as f64 * sigma(&l, k)).abs());
        brute = brute.max((sigma(&l, k) - subset_sigma(&l, k)).abs());
    }
    let ok = sum_rule < 1e-12 && euler < 1e-12 && brute < 1e-12;
    verdict(5, "algebraic identities", ok, &format!("sum rule {sum_rule:.1e}, Euler {euler:.1e}, enumeration {brute:.1e}"));
}

fn criterion_06_jacobian_oracle() {
    let mut rng = ChaCha8Rng::seed_from_u64(6);
    let opts = SolverOptions::default();
    let g = grid(16);
    let ms = models();
    let mut worst = 0.0f64;
    let mut admissible = true;
    for i in 0..20 {
        let m = ms[i % 3];
        let r = [0.5, 1.0, 0.6][i % 3];
        let rho = random_smooth_field(g.clone(), r, &mut rng).unwrap();
        let state = assemble(&m, &rho).unwrap();
        admissible &= state.nodes.iter().all(|n| cone_slack(&n.kappa, 2) > 0.0);
        let psi = Prescription::anisotropic(Prescription::radial_power(1.0, 3.0).unwrap(), 0.3, [0.1, 0.4, 1.0]).unwrap();
        let dir: Vec<f64> = (0..g.len()).map(|_| rng.gen_range(-1.0..1.0)).collect();
        worst = worst.max(jacobian_consistency(&m, &rho, &psi, 2, &opts, &dir).unwrap());
    }
    verdict(6, "Jacobian oracle", admissible && worst < 1e-5, &format!("20 fields, all admissible={admissible}, max relative error {worst:.2e}"));
}

fn criterion_07_admissibility_invariant() {
    let margin = SolverOptions::default().cone_margin;
    let mut iterates = 0;
    let mut violations = Vec::new();
    for run in runs().all_reports() {
        for m in &run.report.monitors {
            iterates += 1;
            if !(m.cone_slack >= margin) {
                violations.push(format!("{} t={} it={} slack={:e}", run.name, m.t, m.iteration, m.cone_slack));
            }
        }
    }
    verdict(
        7,
        "admissibility invariant",
        violations.is_empty() && iterates > 0,
        &format!("{iterates} accepted iterates, {} violations {:?}", violations.len(), violations),
    );
}

fn criterion_08_anisotropic_existence() {
    let (rho, rep) = &runs().aniso;
    let last = rep.last().unwrap();
    // Barriers pass iff R1² ≤ 0.8 and R2² ≥ 1.2.
    let (lo, hi) = (0.8f64.sqrt(), 1.2f64.sqrt());
    let within = rho.min() >= lo && rho.max() <= hi;
    let deviation = uniqueness_probe(&SpaceFormModel::euclidean(), &anisotropic_target(), 2, grid(32), &SolverOptions::default(), &[0.95, 1.05]).unwrap();
    let ok = rep.converged
        && rep.residual_inf < 1e-10
        && last.u_min > 0.0
        && last.kappa_max.is_finite()
        && rep.admissible
        && within
        && deviation < 1e-6;
    verdict(
        8,
        "anisotropic existence probe",
        ok,
        &format!(
            "residual {:.1e}, u_min {:.6}, kappa_max {:.6}, rho in [{:.6}, {:.6}] within [{lo:.6}, {hi:.6}], uniqueness deviation {deviation:.1e}",
            rep.residual_inf,
            last.u_min,
            last.kappa_max,
            rho.min(),
            rho.max()
        ),
    );
}

fn criterion_09_condition_checker_fidelity() {
    let e = SpaceFormModel::euclidean();
    let h = SpaceFormModel::hyperbolic();
    let g = grid(16);
    let target = Prescription::round_target(1.5, 4.0, 2).unwrap();
    // Hand values: ψ = 2.25 ρ⁻⁴ and σ₂(1,1)q² = ρ⁻² for K = 0.
    let psi_c = |r: f64| 2.25 / r.powi(4);
    let coth2 = |r: f64| (1.0 / r.tanh()).powi(2);
    let c0 = coth2(1.0);

    let mut lines = Vec::new();
    let mut ok = true;
    let mut tally = (0, 0);
    let mut compare = |name: &str, got: (bool, f64), want: (bool, f64)| {
        let good = got.0 == want.0 && (got.1 - want.1).abs() < 1e-10;
        ok &= good;
        if want.0 { tally.0 += 1 } else { tally.1 += 1 }
        lines.push(format!("{name}: {} margin {:.6e} vs hand {:.6e}", if got.0 { "pass" } else { "fail" }, got.1, want.1));
    };

    for (name, p, m, r1, r2, low, high) in [
        ("round_target R=[1,2]", &target, &e, 1.0, 2.0, psi_c(1.0) - 1.0, 0.25 - psi_c(2.0)),
        ("round_target R=[1.4,1.6]", &target, &e, 1.4, 1.6, psi_c(1.4) - 1.0 / 1.96, 1.0 / 2.56 - psi_c(1.6)),
        ("constant K=-1 c=coth^2(1) R=[0.5,2]", &Prescription::constant(c0).unwrap(), &h, 0.5, 2.0, c0 - coth2(0.5), coth2(2.0) - c0),
        ("round_target R=[1.6,2]", &target, &e, 1.6, 2.0, psi_c(1.6) - 1.0 / 2.56, 0.25 - psi_c(2.0)),
    ] {
        let r = check_barriers(p, m, 2, r1, r2, &g).unwrap();
        let (l, u) = (r.barrier_low.unwrap(), r.barrier_high.unwrap());
        compare(&format!("barrier low {name}"), (l.ok, l.margin), (low >= 0.0, low));
        compare(&format!("barrier high {name}"), (u.ok, u.margin), (high >= 0.0, high));
    }

    let rs = rho_samples(0.5, 2.0, 64);
    let nus = normal_samples(&g);
    for (name, p, want) in [
        // Margin is minus the max over ρ ∈ [0.5, 2] of ∂_ρ(ρ²ψ), which is −2/ρ³, 2ρ and 0.
        ("monotone radial_power m=4", Prescription::radial_power(1.0, 4.0).unwrap(), 0.25),
        ("monotone constant c=1", Prescription::constant(1.0).unwrap(), -4.0),
        ("monotone round_target m=k", Prescription::round_target(1.5, 2.0, 2).unwrap(), 0.0),
    ] {
        let c = check_monotonicity(&p, &e, 2, &rs, &nus).unwrap().monotone.unwrap();
        compare(name, (c.ok, c.margin), (want >= 0.0, want));
    }
    lines.push(format!("{} passing and {} failing inequalities", tally.0, tally.1));
    for l in &lines {
        println!("  {l}");
    }
    verdict(9, "condition-checker fidelity", ok, &format!("{} comparisons against hand evaluation", lines.len() - 1));
}

fn criterion_10_monitor_sanity_under_refinement() {
    let coarse = runs().aniso.1.last().copied().unwrap();
    let fine_sol = continuity_solve(&SpaceFormModel::euclidean(), &anisotropic_target(), 2, grid(64), &SolverOptions::default()).unwrap();
    let fine = *fine_sol.report.last().unwrap();
    let dk = (fine.kappa_max - coarse.kappa_max).abs() / coarse.kappa_max;
    let dg = (fine.grad_inf - coarse.grad_inf).abs() / coarse.grad_inf;
    verdict(
        10,
        "monitor sanity under refinement",
        dk < 0.02 && dg < 0.02,
        &format!(
            "kappa_max {:.6} -> {:.6} ({:.4}%), grad_inf {:.6} -> {:.6} ({:.4}%)",
            coarse.kappa_max,
            fine.kappa_max,
            100.0 * dk,
            coarse.grad_inf,
            fine.grad_inf,
            100.0 * dg
        ),
    );
}

fn main() -> ExitCode {
    let criteria: [(&str, fn()); 10] = [
        ("criterion_01_round_sphere_recovery", criterion_01_round_sphere_recovery),
        ("criterion_02_constructed_solution", criterion_02_constructed_solution),
        ("criterion_03_barrier_confinement", criterion_03_barrier_confinement),
        ("criterion_04_identity_suite", criterion_04_identity_suite),
        ("criterion_05_algebraic_identities", criterion_05_algebraic_identities),
        ("criterion_06_jacobian_oracle", criterion_06_jacobian_oracle),
        ("criterion_07_admissibility_invariant", criterion_07_admissibility_invariant),
        ("criterion_08_anisotropic_existence", criterion_08_anisotropic_existence),
        ("criterion_09_condition_checker_fidelity", criterion_09_condition_checker_fidelity),
        ("criterion_10_monitor_sanity_under_refinement", criterion_10_monitor_sanity_under_refinement),
    ];
    let mut failed = Vec::new();
    for (name, run) in criteria {
        if panic::catch_unwind(run).is_err() {
            failed.push(name);
        }
    }
    println!("\nacceptance: {} of {} criteria passed", criteria.len() - failed.len(), criteria.len());
    if failed.is_empty() {
        ExitCode::SUCCESS
    } else {
        println!("failed: {}", failed.join(", "));
        ExitCode::FAILURE
    }
}
