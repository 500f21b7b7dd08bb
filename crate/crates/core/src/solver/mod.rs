//! Discrete equation `σ_k(κ(ρ)) − ψ(V, ν) = 0` on the grid, solved by damped
//! Newton iteration inside `Γ_k` and by homotopy continuation from a round
//! sphere.

pub mod banded;
pub mod jacobian;

use std::sync::Arc;

use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;

use crate::algebra::{binomial, cone_slack, sigma};
use crate::geometry::{assemble, starshape_margin, GeometryState};
use crate::grid::{ScalarField, SphereGrid};
use crate::prescription::Prescription;
use crate::spaceform::SpaceFormModel;
use crate::{Error, Result, SURFACE_DIM};

use banded::{solve_refined, BandedLu, Csr};
use jacobian::{assemble_jacobian, JacobianLayout};

/// Which function of the curvatures is compared with `ψ`.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Default)]
pub enum ResidualForm {
    /// `σ_k(κ) − ψ`.
    #[default]
    Raw,
    /// `(σ_k(κ)/C(n,k))^{1/k} − (ψ/C(n,k))^{1/k}`, extended oddly to `σ_k ≤ 0`.
    Normalized,
}

#[derive(Debug, Clone, PartialEq)]
pub struct SolverOptions {
    /// Target for the max-norm of the residual.
    pub newton_tol: f64,
    pub max_newton_iters: usize,
    /// Step reduction factor used when backtracking.
    pub damping: f64,
    pub max_backtracks: usize,
    /// The first homotopy step is `1/homotopy_steps`.
    pub homotopy_steps: usize,
    pub min_homotopy_step: f64,
    /// Residual target at intermediate homotopy parameters `t < 1`.
    pub homotopy_tol: f64,
    /// Every accepted iterate satisfies `min_j σ_j(κ) > cone_margin`.
    pub cone_margin: f64,
    /// Relative step of the finite-difference Jacobian.
    pub fd_step: f64,
    pub residual_form: ResidualForm,
    /// Record the directional consistency error of every assembled Jacobian.
    pub check_jacobian: bool,
}

impl Default for SolverOptions {
    fn default() -> Self {
        Self {
            newton_tol: 1e-10,
            max_newton_iters: 50,
            damping: 0.5,
            max_backtracks: 30,
            homotopy_steps: 10,
            min_homotopy_step: 1e-4,
            homotopy_tol: 1e-8,
            cone_margin: 1e-10,
            fd_step: 1e-6,
            residual_form: ResidualForm::Raw,
            check_jacobian: false,
        }
    }
}

impl SolverOptions {
    pub fn validate(&self) -> Result<()> {
        let bad = |what: &str| Err(Error::InvalidArgument(format!("solver option {what}")));
        if !(self.newton_tol > 0.0 && self.newton_tol < 1.0) {
            return bad("newton_tol must lie in (0, 1)");
        }
        if !(self.homotopy_tol > 0.0 && self.homotopy_tol < 1.0) {
            return bad("homotopy_tol must lie in (0, 1)");
        }
        if !(self.damping > 0.0 && self.damping < 1.0) {
            return bad("damping must lie in (0, 1)");
        }
        if !(self.min_homotopy_step > 0.0 && self.min_homotopy_step < 1.0) {
            return bad("min_homotopy_step must lie in (0, 1)");
        }
        if !(self.cone_margin > 0.0 && self.cone_margin < 1.0) {
            return bad("cone_margin must lie in (0, 1)");
        }
        if !(self.fd_step > 0.0 && self.fd_step < 1.0) {
            return bad("fd_step must lie in (0, 1)");
        }
        if self.max_newton_iters == 0 || self.max_backtracks == 0 || self.homotopy_steps == 0 {
            return bad("iteration counts must be positive");
        }
        Ok(())
    }
}

/// Observed quantities at one accepted iterate.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct Monitor {
    /// Homotopy parameter the iterate belongs to (1 for plain Newton).
    pub t: f64,
    pub iteration: usize,
    pub residual_inf: f64,
    pub rho_min: f64,
    pub rho_max: f64,
    /// `max |∇′ρ|` in the round metric.
    pub grad_inf: f64,
    /// `max_i max_z |κ_i|`.
    pub kappa_max: f64,
    pub u_min: f64,
    /// `min_z min_{j≤k} σ_j(κ)`.
    pub cone_slack: f64,
}

impl Monitor {
    fn observe(state: &GeometryState, k: usize, t: f64, iteration: usize, residual_inf: f64) -> Self {
        let (rho_min, rho_max) = state.rho_range();
        Self {
            t,
            iteration,
            residual_inf,
            rho_min,
            rho_max,
            grad_inf: state.grad_max(),
            kappa_max: state.kappa_max(),
            u_min: starshape_margin(state),
            cone_slack: min_cone_slack(state, k),
        }
    }
}

#[derive(Debug, Clone, PartialEq, Default)]
pub struct SolveReport {
    pub converged: bool,
    /// Newton steps taken, over all homotopy stages.
    pub iterations: usize,
    /// Residual max-norm of every accepted iterate, in order.
    pub residual_trace: Vec<f64>,
    /// Homotopy parameters at which a corrector converged.
    pub homotopy_t: Vec<f64>,
    pub monitors: Vec<Monitor>,
    /// The final iterate is `k`-admissible with the configured margin.
    pub admissible: bool,
    pub residual_inf: f64,
    /// Relative Jacobian consistency errors, filled when `check_jacobian` is set.
    pub jacobian_checks: Vec<f64>,
}

impl SolveReport {
    pub fn last(&self) -> Option<&Monitor> {
        self.monitors.last()
    }

    /// Largest homotopy parameter reached, 1 for plain Newton solves.
    pub fn homotopy_t_final(&self) -> f64 {
        self.homotopy_t.last().copied().unwrap_or(0.0)
    }

    /// Smallest cone slack over all accepted iterates.
    pub fn min_cone_slack(&self) -> f64 {
        self.monitors.iter().map(|m| m.cone_slack).fold(f64::INFINITY, f64::min)
    }

    fn record(&mut self, m: Monitor) {
        self.residual_trace.push(m.residual_inf);
        self.monitors.push(m);
    }
}

/// Details of an unsuccessful solve: the reason, the report so far and the
/// last accepted field.
#[derive(Debug, Clone)]
pub struct SolveFailure {
    pub reason: String,
    pub report: SolveReport,
    pub last_rho: ScalarField,
    /// Last homotopy parameter at which `last_rho` solved the equation.
    pub last_t: f64,
}

#[derive(Debug, Clone)]
pub struct Solution {
    pub rho: ScalarField,
    pub report: SolveReport,
}

fn min_cone_slack(state: &GeometryState, k: usize) -> f64 {
    state
        .nodes
        .iter()
        .map(|n| cone_slack(&n.kappa, k))
        .fold(f64::INFINITY, f64::min)
}

fn max_abs(v: &[f64]) -> f64 {
    v.iter().fold(0.0, |m, x| m.max(x.abs()))
}

fn check_degree(k: usize) -> Result<()> {
    if (1..=SURFACE_DIM).contains(&k) {
        Ok(())
    } else {
        Err(Error::InvalidArgument(format!("degree k must be 1 or 2, got {k}")))
    }
}

fn residual_values(state: &GeometryState, psi: &Prescription, k: usize, form: ResidualForm) -> Vec<f64> {
    let grid = &state.grid;
    let c = binomial(SURFACE_DIM, k);
    let root = |x: f64| x.signum() * (x.abs() / c).powf(1.0 / k as f64);
    crate::parallel::map_indices(grid.len(), |idx| {
        let n = &state.nodes[idx];
        let s = sigma(&n.kappa, k);
        let p = psi.eval(&state.model, grid.unit_vector(idx), n.rho, n.normal);
        match form {
            ResidualForm::Raw => s - p,
            ResidualForm::Normalized => root(s) - root(p),
        }
    })
}

/// `σ_k(κ) − ψ(z, ρ, ν)` at every node.
pub fn residual(model: &SpaceFormModel, rho: &ScalarField, psi: &Prescription, k: usize) -> Result<ScalarField> {
    residual_with_form(model, rho, psi, k, ResidualForm::Raw)
}

pub fn residual_with_form(
    model: &SpaceFormModel,
    rho: &ScalarField,
    psi: &Prescription,
    k: usize,
    form: ResidualForm,
) -> Result<ScalarField> {
    check_degree(k)?;
    let state = assemble(model, rho)?;
    ScalarField::new(rho.grid().clone(), residual_values(&state, psi, k, form))
}

/// Colored central-difference Jacobian of the residual.
pub fn jacobian(
    model: &SpaceFormModel,
    rho: &ScalarField,
    psi: &Prescription,
    k: usize,
    opts: &SolverOptions,
) -> Result<Csr> {
    check_degree(k)?;
    let layout = JacobianLayout::new(rho.grid());
    jacobian_with_layout(&layout, model, rho, psi, k, opts)
}

fn jacobian_with_layout(
    layout: &JacobianLayout,
    model: &SpaceFormModel,
    rho: &ScalarField,
    psi: &Prescription,
    k: usize,
    opts: &SolverOptions,
) -> Result<Csr> {
    assemble_jacobian(layout, rho, opts.fd_step, |f| {
        let state = assemble(model, f)?;
        Ok(residual_values(&state, psi, k, opts.residual_form))
    })
}

/// `‖J v − (R(ρ + εv) − R(ρ − εv))/(2ε)‖_∞ / ‖J v‖_∞` for the colored Jacobian `J`.
pub fn jacobian_consistency(
    model: &SpaceFormModel,
    rho: &ScalarField,
    psi: &Prescription,
    k: usize,
    opts: &SolverOptions,
    direction: &[f64],
) -> Result<f64> {
    let jac = jacobian(model, rho, psi, k, opts)?;
    directional_error(&jac, model, rho, psi, k, opts, direction)
}

fn directional_error(
    jac: &Csr,
    model: &SpaceFormModel,
    rho: &ScalarField,
    psi: &Prescription,
    k: usize,
    opts: &SolverOptions,
    direction: &[f64],
) -> Result<f64> {
    let jv = jac.matvec(direction);
    let eps = opts.fd_step * rho.max_abs().max(1.0) / max_abs(direction).max(f64::MIN_POSITIVE);
    let rp = residual_with_form(model, &rho.axpy(eps, direction), psi, k, opts.residual_form)?;
    let rm = residual_with_form(model, &rho.axpy(-eps, direction), psi, k, opts.residual_form)?;
    let diff: Vec<f64> = jv
        .iter()
        .zip(rp.values().iter().zip(rm.values()))
        .map(|(j, (p, m))| j - (p - m) / (2.0 * eps))
        .collect();
    Ok(max_abs(&diff) / max_abs(&jv))
}

enum Stop {
    Converged(ScalarField),
    Failed {
        cone: bool,
        reason: String,
        last: ScalarField,
    },
}

struct Newton<'a> {
    model: &'a SpaceFormModel,
    k: usize,
    opts: &'a SolverOptions,
    layout: JacobianLayout,
    rng: ChaCha8Rng,
}

impl<'a> Newton<'a> {
    fn new(model: &'a SpaceFormModel, grid: &SphereGrid, k: usize, opts: &'a SolverOptions) -> Self {
        Self {
            model,
            k,
            opts,
            layout: JacobianLayout::new(grid),
            rng: ChaCha8Rng::seed_from_u64(0x5167_6d61),
        }
    }

    /// Geometry and residual of an admissible trial field, or `None`.
    fn admissible(&self, rho: &ScalarField, psi: &Prescription) -> Option<(GeometryState, Vec<f64>)> {
        if !rho.values().iter().all(|&r| self.model.contains(r)) {
            return None;
        }
        let state = assemble(self.model, rho).ok()?;
        if !(min_cone_slack(&state, self.k) > self.opts.cone_margin) {
            return None;
        }
        let r = residual_values(&state, psi, self.k, self.opts.residual_form);
        Some((state, r))
    }

    fn run(
        &mut self,
        rho0: &ScalarField,
        psi: &Prescription,
        tol: f64,
        t: f64,
        report: &mut SolveReport,
    ) -> Result<Stop> {
        let state = assemble(self.model, rho0)?;
        let slack = min_cone_slack(&state, self.k);
        if !(slack > self.opts.cone_margin) {
            return Err(Error::NotAdmissible { k: self.k, slack });
        }
        let mut res = residual_values(&state, psi, self.k, self.opts.residual_form);
        let mut norm = max_abs(&res);
        let mut rho = rho0.clone();
        report.record(Monitor::observe(&state, self.k, t, 0, norm));

        for it in 1..=self.opts.max_newton_iters {
            if norm <= tol {
                return Ok(Stop::Converged(rho));
            }
            let jac = jacobian_with_layout(&self.layout, self.model, &rho, psi, self.k, self.opts)?;
            if self.opts.check_jacobian {
                let dir: Vec<f64> = (0..rho.values().len()).map(|_| self.rng.gen_range(-1.0..1.0)).collect();
                let err = directional_error(&jac, self.model, &rho, psi, self.k, self.opts, &dir)?;
                report.jacobian_checks.push(err);
            }
            let lu = match BandedLu::factor(&jac, &self.layout.order) {
                Ok(lu) => lu,
                Err(e) => {
                    return Ok(Stop::Failed {
                        cone: false,
                        reason: format!("Newton step {it}: {e}"),
                        last: rho,
                    })
                }
            };
            let rhs: Vec<f64> = res.iter().map(|r| -r).collect();
            let delta = solve_refined(&jac, &lu, &rhs);
            report.iterations += 1;

            let mut alpha = 1.0;
            let mut any_admissible = false;
            let mut accepted = None;
            for _ in 0..self.opts.max_backtracks {
                let trial = rho.axpy(alpha, &delta);
                if let Some((st, r)) = self.admissible(&trial, psi) {
                    any_admissible = true;
                    let n = max_abs(&r);
                    if n < norm {
                        accepted = Some((trial, st, r, n));
                        break;
                    }
                }
                alpha *= self.opts.damping;
            }
            match accepted {
                Some((trial, st, r, n)) => {
                    rho = trial;
                    res = r;
                    norm = n;
                    report.record(Monitor::observe(&st, self.k, t, it, norm));
                }
                None => {
                    let reason = if any_admissible {
                        format!("Newton step {it}: residual {norm:e} did not decrease along the step")
                    } else {
                        format!("Newton step {it}: every step length leaves the admissible cone")
                    };
                    return Ok(Stop::Failed {
                        cone: !any_admissible,
                        reason,
                        last: rho,
                    });
                }
            }
        }
        if norm <= tol {
            return Ok(Stop::Converged(rho));
        }
        Ok(Stop::Failed {
            cone: false,
            reason: format!(
                "no convergence after {} Newton steps (residual {norm:e})",
                self.opts.max_newton_iters
            ),
            last: rho,
        })
    }
}

fn finish(report: &mut SolveReport) {
    report.residual_inf = report.residual_trace.last().copied().unwrap_or(f64::INFINITY);
}

/// Damped Newton iteration from an admissible `rho0`.
pub fn newton_solve(
    model: &SpaceFormModel,
    rho0: &ScalarField,
    psi: &Prescription,
    k: usize,
    opts: &SolverOptions,
) -> Result<Solution> {
    opts.validate()?;
    check_degree(k)?;
    psi.validate(model)?;
    let mut newton = Newton::new(model, rho0.grid(), k, opts);
    let mut report = SolveReport::default();
    let stop = newton.run(rho0, psi, opts.newton_tol, 1.0, &mut report)?;
    finish(&mut report);
    match stop {
        Stop::Converged(rho) => {
            report.converged = true;
            report.admissible = true;
            report.homotopy_t.push(1.0);
            Ok(Solution { rho, report })
        }
        Stop::Failed { cone, reason, last } => {
            report.admissible = true;
            let failure = Box::new(SolveFailure {
                reason,
                report,
                last_rho: last,
                last_t: 0.0,
            });
            Err(if cone {
                Error::ConeBreach(failure)
            } else {
                Error::NoConvergence(failure)
            })
        }
    }
}

/// Radius `r₀` at which the round sphere matches the target:
/// `C(n,k)·q(r₀)^k = mean_z ψ(z, r₀, z)`. The first sign change of the
/// difference on a logarithmic scan from small radii is refined by bisection.
pub fn homotopy_start_radius(
    model: &SpaceFormModel,
    psi: &Prescription,
    k: usize,
    grid: &SphereGrid,
) -> Result<f64> {
    check_degree(k)?;
    let c = binomial(SURFACE_DIM, k);
    let units: Vec<[f64; 3]> = (0..grid.len()).map(|i| grid.unit_vector(i)).collect();
    let gap = |r: f64| {
        let mean = units.iter().map(|&z| psi.eval(model, z, r, z)).sum::<f64>() / units.len() as f64;
        c * model.q_unchecked(r).powi(k as i32) - mean
    };
    let hi = 0.99 * model.domain_end().min(20.0);
    let lo = 1e-3 * hi.min(1.0);
    let samples = 400;
    let at = |i: usize| lo * (hi / lo).powf(i as f64 / samples as f64);
    let mut prev = (at(0), gap(at(0)));
    for i in 1..=samples {
        let r = at(i);
        let g = gap(r);
        if g == 0.0 {
            return Ok(r);
        }
        if prev.1.signum() != g.signum() {
            let sign = prev.1.signum();
            let (mut a, mut b) = (prev.0, r);
            for _ in 0..200 {
                let m = 0.5 * (a + b);
                if gap(m).signum() == sign {
                    a = m;
                } else {
                    b = m;
                }
                if b - a <= 4.0 * f64::EPSILON * b {
                    break;
                }
            }
            return Ok(0.5 * (a + b));
        }
        prev = (r, g);
    }
    Err(Error::InvalidArgument(format!(
        "no geodesic sphere in ({lo:.3e}, {hi:.3}) matches the mean of the prescription"
    )))
}

/// Homotopy `ψ_t = (1 − t)ψ₀ + tψ` from a round sphere of radius `r₀`,
/// where `ψ₀` is the round-target family with exponent `k + 2`. Steps grow
/// by 1.5 after success and halve after a failed corrector.
pub fn continuity_solve(
    model: &SpaceFormModel,
    psi_target: &Prescription,
    k: usize,
    grid: Arc<SphereGrid>,
    opts: &SolverOptions,
) -> Result<Solution> {
    opts.validate()?;
    check_degree(k)?;
    psi_target.validate(model)?;
    let r0 = homotopy_start_radius(model, psi_target, k, &grid)?;
    let psi0 = Prescription::round_target(r0, (k + 2) as f64, k)?;
    let mut newton = Newton::new(model, &grid, k, opts);
    let mut report = SolveReport::default();

    let seed = ScalarField::constant(grid.clone(), r0);
    let mut rho = match newton.run(&seed, &psi0, opts.homotopy_tol, 0.0, &mut report)? {
        Stop::Converged(r) => r,
        Stop::Failed { reason, last, .. } => {
            finish(&mut report);
            return Err(Error::NoConvergence(Box::new(SolveFailure {
                reason: format!("start sphere r0 = {r0}: {reason}"),
                report,
                last_rho: last,
                last_t: 0.0,
            })));
        }
    };
    report.homotopy_t.push(0.0);

    let mut t = 0.0;
    let mut dt = 1.0 / opts.homotopy_steps as f64;
    while t < 1.0 {
        let t_try = if t + dt >= 1.0 - 1e-12 { 1.0 } else { t + dt };
        let tol = if t_try == 1.0 {
            opts.newton_tol
        } else {
            opts.homotopy_tol.max(opts.newton_tol)
        };
        let psi_t = Prescription::blend(psi0.clone(), psi_target.clone(), t_try)?;
        match newton.run(&rho, &psi_t, tol, t_try, &mut report)? {
            Stop::Converged(r) => {
                rho = r;
                t = t_try;
                report.homotopy_t.push(t);
                dt *= 1.5;
            }
            Stop::Failed { reason, .. } => {
                dt *= 0.5;
                if dt < opts.min_homotopy_step {
                    // The last monitor belongs to the failed corrector; the
                    // report's final residual refers to the last good field.
                    finish(&mut report);
                    return Err(Error::NoConvergence(Box::new(SolveFailure {
                        reason: format!("homotopy stalled at t = {t} (step below {}): {reason}", opts.min_homotopy_step),
                        report,
                        last_rho: rho,
                        last_t: t,
                    })));
                }
            }
        }
    }
    finish(&mut report);
    report.converged = true;
    report.admissible = true;
    Ok(Solution { rho, report })
}

/// Runs [`newton_solve`] from the round spheres of the given radii and
/// returns the largest pairwise max-norm distance between the solutions.
pub fn uniqueness_probe(
    model: &SpaceFormModel,
    psi: &Prescription,
    k: usize,
    grid: Arc<SphereGrid>,
    opts: &SolverOptions,
    seeds: &[f64],
) -> Result<f64> {
    let solutions = seeds
        .iter()
        .map(|&r| {
            model.check_open(r)?;
            newton_solve(model, &ScalarField::constant(grid.clone(), r), psi, k, opts).map(|s| s.rho)
        })
        .collect::<Result<Vec<_>>>()?;
    let mut worst = 0.0f64;
    for (i, a) in solutions.iter().enumerate() {
        for b in &solutions[i + 1..] {
            worst = worst.max(a.distance(b));
        }
    }
    Ok(worst)
}
