//! Warped-product models of the simply connected space forms.
//!
//! Each model is written as `ds² = dρ² + φ(ρ)² dz²` over the unit sphere with
//! `φ = ρ`, `sin ρ` or `sinh ρ` according to the sectional curvature.

use std::f64::consts::FRAC_PI_2;

use crate::{Error, Result};

/// Practical stand-in for an infinite radial domain.
pub const DEFAULT_DOMAIN_CAP: f64 = 50.0;

/// Points closer than this to `π/2` are rejected in the spherical model.
pub const SPHERICAL_EDGE_GUARD: f64 = 1e-12;

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum Curvature {
    Hyperbolic,
    Flat,
    Spherical,
}

impl Curvature {
    pub fn from_sign(k: i32) -> Result<Self> {
        match k {
            -1 => Ok(Curvature::Hyperbolic),
            0 => Ok(Curvature::Flat),
            1 => Ok(Curvature::Spherical),
            other => Err(Error::Config(format!(
                "model.K must be one of -1, 0, 1 (got {other})"
            ))),
        }
    }

    pub fn sign(self) -> i32 {
        match self {
            Curvature::Hyperbolic => -1,
            Curvature::Flat => 0,
            Curvature::Spherical => 1,
        }
    }
}

/// Ambient space form `N³(K)` in geodesic polar coordinates about the origin.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct SpaceFormModel {
    curvature: Curvature,
    domain_end: f64,
}

impl SpaceFormModel {
    pub fn new(curvature: Curvature) -> Self {
        Self::with_cap(curvature, DEFAULT_DOMAIN_CAP)
    }

    /// `cap` replaces the infinite endpoint for `K ∈ {−1, 0}`; it is ignored
    /// for the sphere, whose endpoint is always `π/2`.
    pub fn with_cap(curvature: Curvature, cap: f64) -> Self {
        let domain_end = match curvature {
            Curvature::Spherical => FRAC_PI_2,
            _ => cap,
        };
        Self { curvature, domain_end }
    }

    pub fn euclidean() -> Self {
        Self::new(Curvature::Flat)
    }

    pub fn spherical() -> Self {
        Self::new(Curvature::Spherical)
    }

    pub fn hyperbolic() -> Self {
        Self::new(Curvature::Hyperbolic)
    }

    pub fn curvature(&self) -> Curvature {
        self.curvature
    }

    /// Sectional curvature as a float, handy in formulas like `φ″ = −Kφ`.
    pub fn k(&self) -> f64 {
        self.curvature.sign() as f64
    }

    /// Right endpoint `a` of the radial domain `(0, a)`.
    pub fn domain_end(&self) -> f64 {
        self.domain_end
    }

    fn upper_limit(&self) -> f64 {
        match self.curvature {
            Curvature::Spherical => FRAC_PI_2 - SPHERICAL_EDGE_GUARD,
            _ => self.domain_end,
        }
    }

    /// True iff `rho` lies in the open interval `(0, a)`.
    pub fn contains(&self, rho: f64) -> bool {
        rho > 0.0 && rho < self.upper_limit()
    }

    pub fn check_open(&self, rho: f64) -> Result<()> {
        if self.contains(rho) {
            Ok(())
        } else {
            Err(Error::Domain {
                rho,
                end: self.domain_end,
            })
        }
    }

    fn check_closed_left(&self, rho: f64) -> Result<()> {
        if rho >= 0.0 && rho < self.upper_limit() {
            Ok(())
        } else {
            Err(Error::Domain {
                rho,
                end: self.domain_end,
            })
        }
    }

    /// Warping function `φ(ρ)`.
    pub fn phi(&self, rho: f64) -> Result<f64> {
        self.check_open(rho)?;
        Ok(self.phi_unchecked(rho))
    }

    pub fn phi_prime(&self, rho: f64) -> Result<f64> {
        self.check_open(rho)?;
        Ok(self.phi_prime_unchecked(rho))
    }

    /// Primitive `Φ(ρ) = ∫₀^ρ φ`.
    #[allow(non_snake_case)]
    pub fn Phi(&self, rho: f64) -> Result<f64> {
        self.check_closed_left(rho)?;
        Ok(self.big_phi_unchecked(rho))
    }

    /// Ratio `q = φ′/φ`, the principal curvature of the geodesic sphere of radius `ρ`.
    pub fn q(&self, rho: f64) -> Result<f64> {
        self.check_open(rho)?;
        Ok(self.q_unchecked(rho))
    }

    // The unchecked variants are used in inner loops where the caller has
    // already screened the field against the domain.

    pub(crate) fn phi_unchecked(&self, rho: f64) -> f64 {
        match self.curvature {
            Curvature::Flat => rho,
            Curvature::Spherical => rho.sin(),
            Curvature::Hyperbolic => rho.sinh(),
        }
    }

    pub(crate) fn phi_prime_unchecked(&self, rho: f64) -> f64 {
        match self.curvature {
            Curvature::Flat => 1.0,
            Curvature::Spherical => rho.cos(),
            Curvature::Hyperbolic => rho.cosh(),
        }
    }

    pub(crate) fn big_phi_unchecked(&self, rho: f64) -> f64 {
        match self.curvature {
            Curvature::Flat => 0.5 * rho * rho,
            // 2 sin²(ρ/2) and 2 sinh²(ρ/2) avoid cancellation near 0.
            Curvature::Spherical => {
                let s = (0.5 * rho).sin();
                2.0 * s * s
            }
            Curvature::Hyperbolic => {
                let s = (0.5 * rho).sinh();
                2.0 * s * s
            }
        }
    }

    pub(crate) fn q_unchecked(&self, rho: f64) -> f64 {
        match self.curvature {
            Curvature::Flat => 1.0 / rho,
            Curvature::Spherical => 1.0 / rho.tan(),
            Curvature::Hyperbolic => 1.0 / rho.tanh(),
        }
    }
}
