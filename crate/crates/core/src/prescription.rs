//! Right-hand sides `ψ(V, ν)` and checkers for the barrier and radial
//! monotonicity conditions.
//!
//! A prescription is evaluated at a base point `z ∈ S²`, a radius `ρ` and a
//! unit normal `ν`. The normal is given by its components in the orthonormal
//! frame `(∂_ρ, ê_θ/φ, ê_φ/φ)`, written as a vector of `ℝ³` by sending `∂_ρ`
//! to `z` (the convention of [`NodeGeometry::normal`]). On a round sphere
//! `ν = z`.
//!
//! [`NodeGeometry::normal`]: crate::geometry::NodeGeometry::normal

use std::fmt;
use std::sync::Arc;

use crate::algebra::binomial;
use crate::grid::SphereGrid;
use crate::spaceform::SpaceFormModel;
use crate::{Error, Result, SURFACE_DIM};

pub type PsiFn = dyn Fn(&SpaceFormModel, [f64; 3], f64, [f64; 3]) -> f64 + Send + Sync;

#[derive(Clone)]
enum Kind {
    Constant {
        c: f64,
    },
    RadialPower {
        c: f64,
        m: f64,
    },
    RoundTarget {
        r_bar: f64,
        m: f64,
        k: usize,
    },
    Anisotropic {
        base: Box<Prescription>,
        eps: f64,
        dir: [f64; 3],
    },
    Blend {
        from: Box<Prescription>,
        to: Box<Prescription>,
        t: f64,
    },
    Custom {
        name: String,
        f: Arc<PsiFn>,
    },
}

/// Immutable, cheaply clonable right-hand side.
#[derive(Clone)]
pub struct Prescription {
    kind: Kind,
}

fn dot(a: [f64; 3], b: [f64; 3]) -> f64 {
    a[0] * b[0] + a[1] * b[1] + a[2] * b[2]
}

fn normalized(v: [f64; 3]) -> [f64; 3] {
    let n = dot(v, v).sqrt();
    [v[0] / n, v[1] / n, v[2] / n]
}

fn positive(name: &str, x: f64) -> Result<f64> {
    if x.is_finite() && x > 0.0 {
        Ok(x)
    } else {
        Err(Error::InvalidArgument(format!("{name} must be positive, got {x}")))
    }
}

impl Prescription {
    /// `ψ ≡ c`.
    pub fn constant(c: f64) -> Result<Self> {
        Ok(Self {
            kind: Kind::Constant {
                c: positive("c", c)?,
            },
        })
    }

    /// `ψ = c·φ(ρ)^{−m}`.
    pub fn radial_power(c: f64, m: f64) -> Result<Self> {
        if !m.is_finite() {
            return Err(Error::InvalidArgument(format!("exponent m must be finite, got {m}")));
        }
        Ok(Self {
            kind: Kind::RadialPower {
                c: positive("c", c)?,
                m,
            },
        })
    }

    /// `ψ = C(2,k)·q(r̄)^k·(φ(r̄)/φ(ρ))^m`, for which `ρ ≡ r̄` is an exact
    /// solution of the degree-`k` equation. Requires `m ≥ k`.
    pub fn round_target(r_bar: f64, m: f64, k: usize) -> Result<Self> {
        positive("r_bar", r_bar)?;
        if !(1..=SURFACE_DIM).contains(&k) {
            return Err(Error::InvalidArgument(format!("degree k must be 1 or 2, got {k}")));
        }
        if !(m.is_finite() && m >= k as f64) {
            return Err(Error::InvalidArgument(format!("exponent m must satisfy m >= k = {k}, got {m}")));
        }
        Ok(Self {
            kind: Kind::RoundTarget { r_bar, m, k },
        })
    }

    /// `ψ = base·(1 + ε⟨ν, E⟩)` with `E = dir/|dir|` and `|ε| < 1`.
    pub fn anisotropic(base: Prescription, eps: f64, dir: [f64; 3]) -> Result<Self> {
        if !(eps.abs() < 1.0) {
            return Err(Error::InvalidArgument(format!("|eps| must be below 1, got {eps}")));
        }
        let len = dot(dir, dir).sqrt();
        if !(len.is_finite() && len > 0.0) {
            return Err(Error::InvalidArgument("direction E must be a nonzero vector".into()));
        }
        Ok(Self {
            kind: Kind::Anisotropic {
                base: Box::new(base),
                eps,
                dir: normalized(dir),
            },
        })
    }

    /// `(1 − t)·from + t·to` for `t ∈ [0, 1]`.
    pub fn blend(from: Prescription, to: Prescription, t: f64) -> Result<Self> {
        if !(0.0..=1.0).contains(&t) {
            return Err(Error::InvalidArgument(format!("blend parameter must lie in [0, 1], got {t}")));
        }
        Ok(Self {
            kind: Kind::Blend {
                from: Box::new(from),
                to: Box::new(to),
                t,
            },
        })
    }

    /// Extension point for right-hand sides outside the built-in families.
    /// The closure must be pure and positive on the region it is queried on.
    pub fn custom<F>(name: impl Into<String>, f: F) -> Self
    where
        F: Fn(&SpaceFormModel, [f64; 3], f64, [f64; 3]) -> f64 + Send + Sync + 'static,
    {
        Self {
            kind: Kind::Custom {
                name: name.into(),
                f: Arc::new(f),
            },
        }
    }

    pub fn family(&self) -> &str {
        match &self.kind {
            Kind::Constant { .. } => "constant",
            Kind::RadialPower { .. } => "radial_power",
            Kind::RoundTarget { .. } => "round_target",
            Kind::Anisotropic { .. } => "anisotropic",
            Kind::Blend { .. } => "blend",
            Kind::Custom { name, .. } => name,
        }
    }

    /// True when `ψ` does not depend on `ν`.
    pub fn is_normal_independent(&self) -> bool {
        match &self.kind {
            Kind::Constant { .. } | Kind::RadialPower { .. } | Kind::RoundTarget { .. } => true,
            Kind::Anisotropic { .. } | Kind::Custom { .. } => false,
            Kind::Blend { from, to, .. } => from.is_normal_independent() && to.is_normal_independent(),
        }
    }

    /// `ψ(z, ρ, ν)`. The caller keeps `ρ` inside the radial domain.
    pub fn eval(&self, model: &SpaceFormModel, z: [f64; 3], rho: f64, nu: [f64; 3]) -> f64 {
        match &self.kind {
            Kind::Constant { c } => *c,
            Kind::RadialPower { c, m } => c * model.phi_unchecked(rho).powf(-m),
            Kind::RoundTarget { r_bar, m, k } => {
                let q = model.q_unchecked(*r_bar);
                binomial(SURFACE_DIM, *k)
                    * q.powi(*k as i32)
                    * (model.phi_unchecked(*r_bar) / model.phi_unchecked(rho)).powf(*m)
            }
            Kind::Anisotropic { base, eps, dir } => {
                base.eval(model, z, rho, nu) * (1.0 + eps * dot(nu, *dir))
            }
            Kind::Blend { from, to, t } => {
                (1.0 - t) * from.eval(model, z, rho, nu) + t * to.eval(model, z, rho, nu)
            }
            Kind::Custom { f, .. } => f(model, z, rho, nu),
        }
    }

    /// Checks that every radius the prescription refers to lies in the domain of `model`.
    pub fn validate(&self, model: &SpaceFormModel) -> Result<()> {
        match &self.kind {
            Kind::RoundTarget { r_bar, .. } => model.check_open(*r_bar),
            Kind::Anisotropic { base, .. } => base.validate(model),
            Kind::Blend { from, to, .. } => {
                from.validate(model)?;
                to.validate(model)
            }
            _ => Ok(()),
        }
    }

    /// Smallest value of `ψ` over grid points `z`, radii `rho_samples` and
    /// the tilted normals used by [`check_monotonicity`]. Fails unless positive.
    pub fn positivity_probe(
        &self,
        model: &SpaceFormModel,
        grid: &SphereGrid,
        rho_samples: &[f64],
    ) -> Result<f64> {
        self.validate(model)?;
        let dirs = normal_samples(grid);
        let mins = crate::parallel::map_indices(dirs.len(), |d| {
            let (z, nu) = dirs[d];
            rho_samples
                .iter()
                .map(|&r| self.eval(model, z, r, nu))
                .fold(f64::INFINITY, |a, b| if b < a || b.is_nan() { b } else { a })
        });
        let min = mins
            .into_iter()
            .fold(f64::INFINITY, |a, b| if b < a || b.is_nan() { b } else { a });
        if min > 0.0 && min.is_finite() {
            Ok(min)
        } else {
            Err(Error::InvalidArgument(format!(
                "prescription '{}' is not positive on the sampled domain (min {min})",
                self.family()
            )))
        }
    }
}

impl fmt::Debug for Prescription {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match &self.kind {
            Kind::Constant { c } => write!(f, "constant(c={c})"),
            Kind::RadialPower { c, m } => write!(f, "radial_power(c={c}, m={m})"),
            Kind::RoundTarget { r_bar, m, k } => write!(f, "round_target(r_bar={r_bar}, m={m}, k={k})"),
            Kind::Anisotropic { base, eps, dir } => {
                write!(f, "anisotropic({base:?}, eps={eps}, dir={dir:?})")
            }
            Kind::Blend { from, to, t } => write!(f, "blend({from:?}, {to:?}, t={t})"),
            Kind::Custom { name, .. } => write!(f, "custom({name})"),
        }
    }
}

/// One checked inequality: `ok` and the worst signed slack over `samples` evaluations.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct Condition {
    pub ok: bool,
    pub margin: f64,
    pub samples: usize,
}

/// Outcome of the condition checkers. Each checker fills its own entries.
#[derive(Debug, Clone, Copy, Default, PartialEq)]
pub struct ConditionReport {
    pub barrier_low: Option<Condition>,
    pub barrier_high: Option<Condition>,
    pub monotone: Option<Condition>,
}

impl ConditionReport {
    /// True when every populated condition holds.
    pub fn all_ok(&self) -> bool {
        [self.barrier_low, self.barrier_high, self.monotone]
            .iter()
            .flatten()
            .all(|c| c.ok)
    }

    pub fn merge(self, other: ConditionReport) -> ConditionReport {
        ConditionReport {
            barrier_low: other.barrier_low.or(self.barrier_low),
            barrier_high: other.barrier_high.or(self.barrier_high),
            monotone: other.monotone.or(self.monotone),
        }
    }
}

/// Threshold on `max ∂_ρ(φ^k ψ)` below which the monotonicity condition is accepted.
pub const MONOTONE_TOLERANCE: f64 = 1e-8;

/// Default number of radii sampled by the monotonicity checker.
pub const DEFAULT_RHO_SAMPLES: usize = 64;

/// `σ_k(1, 1)·q(ρ)^k`, the value of the operator on the geodesic sphere of radius `ρ`.
pub fn round_sphere_value(model: &SpaceFormModel, k: usize, rho: f64) -> Result<f64> {
    Ok(binomial(SURFACE_DIM, k) * model.q(rho)?.powi(k as i32))
}

/// Evaluates the lower barrier at `R1` and the upper barrier at `R2` with
/// `ν = V/|V|` at every grid point:
///
/// ```text
///   low  = min_z [ψ(z, R1, z) − σ_k(1,1) q(R1)^k]
///   high = min_z [σ_k(1,1) q(R2)^k − ψ(z, R2, z)]
/// ```
pub fn check_barriers(
    psi: &Prescription,
    model: &SpaceFormModel,
    k: usize,
    r1: f64,
    r2: f64,
    grid: &SphereGrid,
) -> Result<ConditionReport> {
    if !(r1 > 0.0 && r1 < r2 && model.contains(r2)) {
        return Err(Error::InvalidArgument(format!(
            "barrier radii must satisfy 0 < R1 < R2 < {}, got R1={r1}, R2={r2}",
            model.domain_end()
        )));
    }
    psi.validate(model)?;
    let lo_ref = round_sphere_value(model, k, r1)?;
    let hi_ref = round_sphere_value(model, k, r2)?;
    let slacks = crate::parallel::map_indices(grid.len(), |idx| {
        let z = grid.unit_vector(idx);
        (
            psi.eval(model, z, r1, z) - lo_ref,
            hi_ref - psi.eval(model, z, r2, z),
        )
    });
    let low = slacks.iter().map(|s| s.0).fold(f64::INFINITY, f64::min);
    let high = slacks.iter().map(|s| s.1).fold(f64::INFINITY, f64::min);
    let cond = |margin: f64| Condition {
        ok: margin >= 0.0,
        margin,
        samples: grid.len(),
    };
    Ok(ConditionReport {
        barrier_low: Some(cond(low)),
        barrier_high: Some(cond(high)),
        monotone: None,
    })
}

/// `count` equally spaced radii covering `[lo, hi]`.
pub fn rho_samples(lo: f64, hi: f64, count: usize) -> Vec<f64> {
    match count {
        0 => Vec::new(),
        1 => vec![0.5 * (lo + hi)],
        _ => (0..count)
            .map(|i| lo + (hi - lo) * i as f64 / (count - 1) as f64)
            .collect(),
    }
}

/// Radii used when no barrier interval is given: `[0.5, 2]`, cut at `0.95·a`.
pub fn default_rho_range(model: &SpaceFormModel) -> (f64, f64) {
    let hi = 2.0f64.min(0.95 * model.domain_end());
    (0.5f64.min(0.5 * hi), hi)
}

/// Pairs `(z, ν)` at every grid point: the radial normal `ν = z` and four
/// normals tilted by `±0.5` along `ê_θ` and `ê_φ`.
pub fn normal_samples(grid: &SphereGrid) -> Vec<([f64; 3], [f64; 3])> {
    let mut out = Vec::with_capacity(5 * grid.len());
    for idx in 0..grid.len() {
        let [z, et, ep] = grid.frame(idx);
        out.push((z, z));
        for e in [et, ep] {
            for s in [0.5, -0.5] {
                out.push((z, normalized([z[0] + s * e[0], z[1] + s * e[1], z[2] + s * e[2]])));
            }
        }
    }
    out
}

/// Fourth-order centered difference step for `ρ ↦ f(ρ)` inside `(0, a)`.
fn radial_step(model: &SpaceFormModel, rho: f64) -> Option<f64> {
    let room = rho.min(model.domain_end() - rho);
    let h = (1e-3 * rho.max(1.0)).min(0.2 * room);
    (h > 1e-9 * rho.max(1.0)).then_some(h)
}

fn fd4(f: impl Fn(f64) -> f64, x: f64, h: f64) -> f64 {
    (8.0 * (f(x + h) - f(x - h)) - (f(x + 2.0 * h) - f(x - 2.0 * h))) / (12.0 * h)
}

/// Samples `∂_ρ(φ(ρ)^k ψ(z, ρ, ν))` at fixed `(z, ν)` by fourth-order
/// centered differences. The margin is `−max` of the derivative, and the
/// condition is accepted when the maximum is at most [`MONOTONE_TOLERANCE`].
pub fn check_monotonicity(
    psi: &Prescription,
    model: &SpaceFormModel,
    k: usize,
    rho_samples: &[f64],
    nu_samples: &[([f64; 3], [f64; 3])],
) -> Result<ConditionReport> {
    psi.validate(model)?;
    let mut steps = Vec::with_capacity(rho_samples.len());
    for &r in rho_samples {
        model.check_open(r)?;
        steps.push(radial_step(model, r).ok_or_else(|| {
            Error::InvalidArgument(format!("radius {r} too close to the domain boundary"))
        })?);
    }
    let maxima = crate::parallel::map_indices(nu_samples.len(), |s| {
        let (z, nu) = nu_samples[s];
        let weighted = |r: f64| model.phi_unchecked(r).powi(k as i32) * psi.eval(model, z, r, nu);
        rho_samples
            .iter()
            .zip(&steps)
            .map(|(&r, &h)| fd4(weighted, r, h))
            .fold(f64::NEG_INFINITY, f64::max)
    });
    let max = maxima.into_iter().fold(f64::NEG_INFINITY, f64::max);
    Ok(ConditionReport {
        monotone: Some(Condition {
            ok: max <= MONOTONE_TOLERANCE,
            margin: -max,
            samples: rho_samples.len() * nu_samples.len(),
        }),
        ..Default::default()
    })
}

/// Partial derivatives of `ψ` at one point.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct DirectionalDerivatives {
    /// `∂ψ/∂ρ` at fixed `(z, ν)`.
    pub d_rho: f64,
    /// Gradient of `ψ` in `ν` along the unit sphere, a vector orthogonal to `ν`.
    pub d_nu: [f64; 3],
}

/// Centered differences of `ψ` in `ρ`, and in `ν` along great circles
/// through `ν` (each perturbation is renormalized to unit length).
pub fn directional_derivatives(
    psi: &Prescription,
    model: &SpaceFormModel,
    z: [f64; 3],
    rho: f64,
    nu: [f64; 3],
) -> Result<DirectionalDerivatives> {
    model.check_open(rho)?;
    psi.validate(model)?;
    let h = radial_step(model, rho)
        .ok_or_else(|| Error::InvalidArgument(format!("radial step underflows at rho = {rho}")))?;
    let d_rho = fd4(|r| psi.eval(model, z, r, nu), rho, h);

    let nu = normalized(nu);
    // Any vector not parallel to ν seeds an orthonormal tangent pair.
    let seed = if nu[0].abs() < 0.9 { [1.0, 0.0, 0.0] } else { [0.0, 1.0, 0.0] };
    let s = dot(seed, nu);
    let t1 = normalized([seed[0] - s * nu[0], seed[1] - s * nu[1], seed[2] - s * nu[2]]);
    let t2 = [
        nu[1] * t1[2] - nu[2] * t1[1],
        nu[2] * t1[0] - nu[0] * t1[2],
        nu[0] * t1[1] - nu[1] * t1[0],
    ];
    let hn = 1e-3;
    let mut d_nu = [0.0; 3];
    for t in [t1, t2] {
        let along = |a: f64| {
            let v = [nu[0] * a.cos() + t[0] * a.sin(), nu[1] * a.cos() + t[1] * a.sin(), nu[2] * a.cos() + t[2] * a.sin()];
            psi.eval(model, z, rho, v)
        };
        let d = fd4(along, 0.0, hn);
        for c in 0..3 {
            d_nu[c] += d * t[c];
        }
    }
    Ok(DirectionalDerivatives { d_rho, d_nu })
}
