//! Latitude–longitude discretization of the unit sphere `S²`.
//!
//! Colatitudes are cell centred, `θ_i = (i + ½)·π/n_θ`, so no node sits on a
//! pole. Longitudes are periodic, `φ_j = 2πj/n_φ`. Stencils that step past a
//! pole read a ghost row through the identification
//! `f(−θ, φ) = f(θ, φ + π)`, which is why `n_φ` must be even.
//!
//! Tensor components pick up a sign under that identification, one factor
//! of −1 per `θ` index; [`Parity`] carries this.

use std::f64::consts::PI;
use std::sync::Arc;

use crate::parallel::map_indices;
use crate::{Error, Result};

pub const MIN_N_THETA: usize = 8;
pub const MIN_N_PHI: usize = 8;

#[derive(Debug, Clone, PartialEq)]
pub struct SphereGrid {
    n_theta: usize,
    n_phi: usize,
    theta: Vec<f64>,
    phi: Vec<f64>,
    sin_theta: Vec<f64>,
    cos_theta: Vec<f64>,
}

/// Behaviour of a component field under the cross-pole identification.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum Parity {
    Even,
    Odd,
}

impl Parity {
    fn sign(self) -> f64 {
        match self {
            Parity::Even => 1.0,
            Parity::Odd => -1.0,
        }
    }
}

impl SphereGrid {
    pub fn new(n_theta: usize, n_phi: usize) -> Result<Self> {
        if n_theta < MIN_N_THETA {
            return Err(Error::Grid(format!(
                "grid.n_theta must be at least {MIN_N_THETA} (got {n_theta})"
            )));
        }
        if n_phi < MIN_N_PHI {
            return Err(Error::Grid(format!(
                "grid.n_phi must be at least {MIN_N_PHI} (got {n_phi})"
            )));
        }
        if n_phi % 2 != 0 {
            return Err(Error::Grid(format!(
                "grid.n_phi must be even for the cross-pole identification (got {n_phi})"
            )));
        }
        let h = PI / n_theta as f64;
        let theta: Vec<f64> = (0..n_theta).map(|i| (i as f64 + 0.5) * h).collect();
        let phi = (0..n_phi)
            .map(|j| 2.0 * PI * j as f64 / n_phi as f64)
            .collect();
        let sin_theta = theta.iter().map(|t| t.sin()).collect();
        let cos_theta = theta.iter().map(|t| t.cos()).collect();
        Ok(Self {
            n_theta,
            n_phi,
            theta,
            phi,
            sin_theta,
            cos_theta,
        })
    }

    pub fn n_theta(&self) -> usize {
        self.n_theta
    }

    pub fn n_phi(&self) -> usize {
        self.n_phi
    }

    pub fn len(&self) -> usize {
        self.n_theta * self.n_phi
    }

    pub fn is_empty(&self) -> bool {
        self.len() == 0
    }

    pub fn h_theta(&self) -> f64 {
        PI / self.n_theta as f64
    }

    pub fn h_phi(&self) -> f64 {
        2.0 * PI / self.n_phi as f64
    }

    /// Flat index of node `(i, j)`; storage is θ-major.
    #[inline]
    pub fn index(&self, i: usize, j: usize) -> usize {
        i * self.n_phi + j
    }

    #[inline]
    pub fn row_col(&self, idx: usize) -> (usize, usize) {
        (idx / self.n_phi, idx % self.n_phi)
    }

    /// `(θ, φ)` of a node.
    pub fn angles(&self, idx: usize) -> (f64, f64) {
        let (i, j) = self.row_col(idx);
        (self.theta[i], self.phi[j])
    }

    pub fn theta(&self, i: usize) -> f64 {
        self.theta[i]
    }

    pub fn sin_theta(&self, i: usize) -> f64 {
        self.sin_theta[i]
    }

    pub fn cos_theta(&self, i: usize) -> f64 {
        self.cos_theta[i]
    }

    /// Position `z ∈ S² ⊂ ℝ³` together with the unit coordinate directions
    /// `ê_θ` and `ê_φ` at the node.
    pub fn frame(&self, idx: usize) -> [[f64; 3]; 3] {
        let (i, j) = self.row_col(idx);
        let (st, ct) = (self.sin_theta[i], self.cos_theta[i]);
        let (sp, cp) = self.phi[j].sin_cos();
        [
            [st * cp, st * sp, ct],
            [ct * cp, ct * sp, -st],
            [-sp, cp, 0.0],
        ]
    }

    pub fn unit_vector(&self, idx: usize) -> [f64; 3] {
        self.frame(idx)[0]
    }

    /// Resolves a possibly out-of-range `(i, j)` to a stored node and the
    /// ghost sign flag (`true` when the step crossed a pole).
    #[inline]
    pub(crate) fn resolve(&self, i: isize, j: isize) -> (usize, bool) {
        let nt = self.n_theta as isize;
        let np = self.n_phi as isize;
        let (row, col, crossed) = if i < 0 {
            (-1 - i, j + np / 2, true)
        } else if i >= nt {
            (2 * nt - 1 - i, j + np / 2, true)
        } else {
            (i, j, false)
        };
        let col = col.rem_euclid(np);
        (self.index(row as usize, col as usize), crossed)
    }

    /// The nine nodes of the 3×3 stencil around `idx`, ghosts resolved.
    pub fn stencil(&self, idx: usize) -> [usize; 9] {
        let (i, j) = self.row_col(idx);
        let mut out = [0; 9];
        let mut n = 0;
        for di in -1..=1isize {
            for dj in -1..=1isize {
                out[n] = self.resolve(i as isize + di, j as isize + dj).0;
                n += 1;
            }
        }
        out
    }

    /// Multipliers `1 + O(h²)` applied to the round-sphere Christoffel
    /// terms `cot θ·f_φ` and `sin θ cos θ·f_θ`.
    ///
    /// They make the discrete covariant Hessian exact on the restriction of
    /// linear functions `x·z`, whose longitude modes are the only ones that
    /// stay non-degenerate at a pole. Without them the mismatch between the
    /// θ and φ stencil errors is `O(h²)` in coordinate components but
    /// `O(h²/sin θ)` in an orthonormal frame.
    pub fn christoffel_factors(&self) -> (f64, f64) {
        let sinc = |x: f64| x.sin() / x;
        let ht = self.h_theta();
        let hp = self.h_phi();
        let half = sinc(0.5 * hp);
        (sinc(ht), half * half / sinc(ht))
    }

    /// Raw second-order partial derivatives of a component field.
    pub fn partials(&self, values: &[f64], parity: Parity) -> Vec<Partials> {
        assert_eq!(values.len(), self.len(), "field does not match grid");
        let ht = self.h_theta();
        let hp = self.h_phi();
        let sign = parity.sign();
        let at = |i: isize, j: isize| {
            let (k, crossed) = self.resolve(i, j);
            if crossed {
                sign * values[k]
            } else {
                values[k]
            }
        };
        map_indices(self.len(), |idx| {
            let (i, j) = self.row_col(idx);
            let (i, j) = (i as isize, j as isize);
            let c = values[idx];
            let n = at(i - 1, j);
            let s = at(i + 1, j);
            let w = at(i, j - 1);
            let e = at(i, j + 1);
            let ne = at(i - 1, j + 1);
            let nw = at(i - 1, j - 1);
            let se = at(i + 1, j + 1);
            let sw = at(i + 1, j - 1);
            Partials {
                t: (s - n) / (2.0 * ht),
                p: (e - w) / (2.0 * hp),
                tt: (s - 2.0 * c + n) / (ht * ht),
                pp: (e - 2.0 * c + w) / (hp * hp),
                tp: ((se - sw) - (ne - nw)) / (4.0 * ht * hp),
            }
        })
    }
}

/// Coordinate partial derivatives `∂_θ, ∂_φ, ∂_θθ, ∂_θφ, ∂_φφ` at one node.
#[derive(Debug, Clone, Copy, PartialEq, Default)]
pub struct Partials {
    pub t: f64,
    pub p: f64,
    pub tt: f64,
    pub tp: f64,
    pub pp: f64,
}

/// One real number per node, e.g. the height function `ρ`.
#[derive(Debug, Clone, PartialEq)]
pub struct ScalarField {
    grid: Arc<SphereGrid>,
    values: Vec<f64>,
}

impl ScalarField {
    pub fn new(grid: Arc<SphereGrid>, values: Vec<f64>) -> Result<Self> {
        if values.len() != grid.len() {
            return Err(Error::InvalidArgument(format!(
                "field has {} values for a grid of {} nodes",
                values.len(),
                grid.len()
            )));
        }
        if let Some(k) = values.iter().position(|v| !v.is_finite()) {
            let (theta, phi) = grid.angles(k);
            return Err(Error::Geometry {
                theta,
                phi,
                reason: "non-finite field value".into(),
            });
        }
        Ok(Self { grid, values })
    }

    pub fn constant(grid: Arc<SphereGrid>, c: f64) -> Self {
        let values = vec![c; grid.len()];
        Self { grid, values }
    }

    /// Samples `f(θ, φ)` at every node.
    pub fn from_fn(grid: Arc<SphereGrid>, f: impl Fn(f64, f64) -> f64) -> Result<Self> {
        let values = (0..grid.len())
            .map(|k| {
                let (t, p) = grid.angles(k);
                f(t, p)
            })
            .collect();
        Self::new(grid, values)
    }

    pub fn grid(&self) -> &Arc<SphereGrid> {
        &self.grid
    }

    pub fn values(&self) -> &[f64] {
        &self.values
    }

    pub fn into_values(self) -> Vec<f64> {
        self.values
    }

    pub fn min(&self) -> f64 {
        self.values.iter().copied().fold(f64::INFINITY, f64::min)
    }

    pub fn max(&self) -> f64 {
        self.values.iter().copied().fold(f64::NEG_INFINITY, f64::max)
    }

    pub fn max_abs(&self) -> f64 {
        self.values.iter().fold(0.0, |m, v| m.max(v.abs()))
    }

    /// `‖self − other‖_∞`.
    pub fn distance(&self, other: &ScalarField) -> f64 {
        self.values
            .iter()
            .zip(&other.values)
            .fold(0.0, |m, (a, b)| m.max((a - b).abs()))
    }

    /// Rotation by `shift` longitude cells: the new value at column `j` is
    /// the old value at `j − shift`.
    pub fn rotate_phi(&self, shift: usize) -> ScalarField {
        let g = &self.grid;
        let np = g.n_phi();
        let mut values = vec![0.0; g.len()];
        for i in 0..g.n_theta() {
            for j in 0..np {
                values[g.index(i, (j + shift) % np)] = self.values[g.index(i, j)];
            }
        }
        ScalarField {
            grid: self.grid.clone(),
            values,
        }
    }

    /// `self + alpha·dir`, unchecked for finiteness.
    pub fn axpy(&self, alpha: f64, dir: &[f64]) -> ScalarField {
        let values = self
            .values
            .iter()
            .zip(dir)
            .map(|(v, d)| v + alpha * d)
            .collect();
        ScalarField {
            grid: self.grid.clone(),
            values,
        }
    }
}

/// Value, gradient and covariant Hessian with respect to the round metric
/// `e = dθ² + sin²θ dφ²` at one node.
#[derive(Debug, Clone, Copy, PartialEq, Default)]
pub struct JetNode {
    pub value: f64,
    /// `(∂_θ f, ∂_φ f)`, coordinate components.
    pub grad: [f64; 2],
    /// `∇′_ij f`, coordinate components.
    pub hess: [[f64; 2]; 2],
    /// `e^{ij} f_i f_j`.
    pub grad_sq: f64,
}

#[derive(Debug, Clone)]
pub struct CovariantJet {
    pub grid: Arc<SphereGrid>,
    pub nodes: Vec<JetNode>,
}

pub fn covariant_jet(field: &ScalarField) -> CovariantJet {
    let grid = field.grid();
    let raw = grid.partials(field.values(), Parity::Even);
    let (mixed, polar) = grid.christoffel_factors();
    let nodes = raw
        .iter()
        .enumerate()
        .map(|(idx, d)| {
            let i = idx / grid.n_phi();
            let (s, c) = (grid.sin_theta(i), grid.cos_theta(i));
            let tp = d.tp - mixed * (c / s) * d.p;
            JetNode {
                value: field.values()[idx],
                grad: [d.t, d.p],
                hess: [[d.tt, tp], [tp, d.pp + polar * s * c * d.t]],
                grad_sq: d.t * d.t + d.p * d.p / (s * s),
            }
        })
        .collect();
    CovariantJet {
        grid: grid.clone(),
        nodes,
    }
}

/// Two-grid convergence estimate.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct RefinementOrder {
    pub coarse_error: f64,
    pub fine_error: f64,
}

impl RefinementOrder {
    /// `coarse_error / fine_error`; `None` when both errors are exactly zero.
    pub fn ratio(&self) -> Option<f64> {
        if self.coarse_error == 0.0 && self.fine_error == 0.0 {
            None
        } else {
            Some(self.coarse_error / self.fine_error)
        }
    }

    /// `log₂` of the error ratio; `None` means the operation was exact on both grids.
    pub fn order(&self) -> Option<f64> {
        self.ratio().map(f64::log2)
    }

    /// Exact results count as converged at any rate.
    pub fn ratio_within(&self, lo: f64, hi: f64) -> bool {
        self.ratio().map_or(true, |r| r >= lo && r <= hi)
    }
}

/// Evaluates `error_on(grid)` on `n_θ × n_φ` and on the doubled grid.
pub fn refinement_order<F>(n_theta: usize, n_phi: usize, mut error_on: F) -> Result<RefinementOrder>
where
    F: FnMut(Arc<SphereGrid>) -> Result<f64>,
{
    let coarse = Arc::new(SphereGrid::new(n_theta, n_phi)?);
    let fine = Arc::new(SphereGrid::new(2 * n_theta, 2 * n_phi)?);
    Ok(RefinementOrder {
        coarse_error: error_on(coarse)?,
        fine_error: error_on(fine)?,
    })
}
