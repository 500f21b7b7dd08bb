//! Induced geometry of a radial graph `M = {(z, ρ(z))}` in a space form.
//!
//! Per node, in the `(θ, φ)` coordinate frame:
//!
//! ```text
//!   g_ij = φ² e_ij + ρ_i ρ_j
//!   h_ij = φ / W · (−∇′_ij ρ + 2(φ′/φ) ρ_i ρ_j + φφ′ e_ij),   W = √(φ² + |∇′ρ|²)
//!   b    = γ h γ,  γ = g^{−1/2}
//!   u    = ⟨φ∂_ρ, ν⟩ = φ² / W
//! ```

mod identities;

pub use identities::{
    codazzi_residual, hessian_of_primitive_residual, support_gradient_residual,
    support_hessian_residual, IdentityOptions,
};

use std::sync::Arc;

use crate::grid::{covariant_jet, JetNode, ScalarField, SphereGrid};
use crate::spaceform::SpaceFormModel;
use crate::{Error, Result};

pub type Sym2 = [[f64; 2]; 2];

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct NodeGeometry {
    pub rho: f64,
    pub phi: f64,
    pub phi_prime: f64,
    /// `Φ(ρ)`.
    pub primitive: f64,
    pub jet: JetNode,
    pub g: Sym2,
    pub g_inv: Sym2,
    pub h: Sym2,
    pub b: Sym2,
    /// Principal curvatures, `κ₁ ≥ κ₂`.
    pub kappa: [f64; 2],
    /// Support function `u`.
    pub u: f64,
    /// Outward unit normal expressed in the orthonormal frame `(∂_ρ, ê_θ/φ, ê_φ/φ)`
    /// and mapped to `ℝ³` by sending `∂_ρ ↦ z`.
    pub normal: [f64; 3],
}

#[derive(Debug, Clone)]
pub struct GeometryState {
    pub model: SpaceFormModel,
    pub grid: Arc<SphereGrid>,
    pub nodes: Vec<NodeGeometry>,
}

impl GeometryState {
    pub fn len(&self) -> usize {
        self.nodes.len()
    }

    pub fn is_empty(&self) -> bool {
        self.nodes.is_empty()
    }

    /// `max_z max_i |κ_i(z)|`.
    pub fn kappa_max(&self) -> f64 {
        self.nodes
            .iter()
            .fold(0.0, |m, n| m.max(n.kappa[0].abs()).max(n.kappa[1].abs()))
    }

    /// `max_z |∇′ρ|`.
    pub fn grad_max(&self) -> f64 {
        self.nodes.iter().fold(0.0f64, |m, n| m.max(n.jet.grad_sq)).sqrt()
    }

    pub fn rho_range(&self) -> (f64, f64) {
        self.nodes.iter().fold((f64::INFINITY, f64::NEG_INFINITY), |(lo, hi), n| {
            (lo.min(n.rho), hi.max(n.rho))
        })
    }

    pub fn field<F: Fn(&NodeGeometry) -> f64>(&self, f: F) -> Vec<f64> {
        self.nodes.iter().map(f).collect()
    }
}

pub fn det2(m: &Sym2) -> f64 {
    m[0][0] * m[1][1] - m[0][1] * m[1][0]
}

pub fn inv2(m: &Sym2) -> Sym2 {
    let d = det2(m);
    [[m[1][1] / d, -m[0][1] / d], [-m[1][0] / d, m[0][0] / d]]
}

pub fn mul2(a: &Sym2, b: &Sym2) -> Sym2 {
    let mut out = [[0.0; 2]; 2];
    for i in 0..2 {
        for j in 0..2 {
            out[i][j] = a[i][0] * b[0][j] + a[i][1] * b[1][j];
        }
    }
    out
}

/// Inverse square root of a 2×2 SPD matrix via `√M = (M + √det·I)/√(tr + 2√det)`.
pub fn inv_sqrt_spd2(m: &Sym2) -> Sym2 {
    let s = det2(m).sqrt();
    let t = (m[0][0] + m[1][1] + 2.0 * s).sqrt();
    let root = [
        [(m[0][0] + s) / t, m[0][1] / t],
        [m[1][0] / t, (m[1][1] + s) / t],
    ];
    let mut out = inv2(&root);
    // Symmetrize away the last-bit asymmetry.
    let off = 0.5 * (out[0][1] + out[1][0]);
    out[0][1] = off;
    out[1][0] = off;
    out
}

/// Eigenvalues of a symmetric 2×2 matrix, largest first.
pub fn eig_sym2(m: &Sym2) -> [f64; 2] {
    let mean = 0.5 * (m[0][0] + m[1][1]);
    let half = 0.5 * (m[0][0] - m[1][1]);
    let r = half.hypot(m[0][1]);
    [mean + r, mean - r]
}

/// Pointwise geometry from the jet of `ρ` at one node.
pub(crate) fn node_geometry(
    model: &SpaceFormModel,
    jet: &JetNode,
    sin_theta: f64,
    frame: &[[f64; 3]; 3],
) -> NodeGeometry {
    let rho = jet.value;
    let phi = model.phi_unchecked(rho);
    let dphi = model.phi_prime_unchecked(rho);
    let [rt, rp] = jet.grad;
    let e = [[1.0, 0.0], [0.0, sin_theta * sin_theta]];
    let p = [rt, rp];
    let w = (phi * phi + jet.grad_sq).sqrt();

    let mut g = [[0.0; 2]; 2];
    let mut h = [[0.0; 2]; 2];
    for i in 0..2 {
        for j in 0..2 {
            g[i][j] = phi * phi * e[i][j] + p[i] * p[j];
            h[i][j] = phi / w
                * (-jet.hess[i][j] + 2.0 * dphi / phi * p[i] * p[j] + phi * dphi * e[i][j]);
        }
    }
    let g_inv = inv2(&g);
    let gamma = inv_sqrt_spd2(&g);
    let mut b = mul2(&mul2(&gamma, &h), &gamma);
    let off = 0.5 * (b[0][1] + b[1][0]);
    b[0][1] = off;
    b[1][0] = off;
    let kappa = eig_sym2(&b);

    // Orthonormal components: radial φ/W, tangential −∇′ρ/W.
    let [z, et, ep] = frame;
    let grad_t = rt;
    let grad_p = rp / sin_theta;
    let mut normal = [0.0; 3];
    for c in 0..3 {
        normal[c] = (phi * z[c] - grad_t * et[c] - grad_p * ep[c]) / w;
    }

    NodeGeometry {
        rho,
        phi,
        phi_prime: dphi,
        primitive: model.big_phi_unchecked(rho),
        jet: *jet,
        g,
        g_inv,
        h,
        b,
        kappa,
        u: phi * phi / w,
        normal,
    }
}

fn screen(grid: &SphereGrid, idx: usize, node: &NodeGeometry) -> Result<()> {
    let finite = node.kappa.iter().all(|k| k.is_finite())
        && node.u.is_finite()
        && node.g.iter().flatten().all(|x| x.is_finite())
        && node.h.iter().flatten().all(|x| x.is_finite());
    let (theta, phi) = grid.angles(idx);
    if !finite {
        return Err(Error::Geometry {
            theta,
            phi,
            reason: "non-finite geometry".into(),
        });
    }
    if !(node.g[0][0] > 0.0 && det2(&node.g) > 0.0) {
        return Err(Error::Geometry {
            theta,
            phi,
            reason: "induced metric is not positive definite".into(),
        });
    }
    Ok(())
}

/// Induced metric, second fundamental form, shape matrix, principal
/// curvatures, normal and support function at every node.
pub fn assemble(model: &SpaceFormModel, rho: &ScalarField) -> Result<GeometryState> {
    for &r in rho.values() {
        model.check_open(r)?;
    }
    let grid = rho.grid().clone();
    let jet = covariant_jet(rho);
    let nodes = crate::parallel::map_indices(grid.len(), |idx| {
        let i = idx / grid.n_phi();
        node_geometry(model, &jet.nodes[idx], grid.sin_theta(i), &grid.frame(idx))
    });
    for (idx, n) in nodes.iter().enumerate() {
        screen(&grid, idx, n)?;
    }
    Ok(GeometryState {
        model: *model,
        grid,
        nodes,
    })
}

/// `min_z u(z)`; positive certifies strict starshapedness at grid resolution.
pub fn starshape_margin(state: &GeometryState) -> f64 {
    state.nodes.iter().fold(f64::INFINITY, |m, n| m.min(n.u))
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::algebra::sigma;
    use approx::assert_relative_eq;

    fn grid(nt: usize, np: usize) -> Arc<SphereGrid> {
        Arc::new(SphereGrid::new(nt, np).unwrap())
    }

    fn models() -> [SpaceFormModel; 3] {
        [
            SpaceFormModel::hyperbolic(),
            SpaceFormModel::euclidean(),
            SpaceFormModel::spherical(),
        ]
    }

    #[test]
    fn round_sphere() {
        let g = grid(8, 16);
        for m in models() {
            let r = 0.7;
            let st = assemble(&m, &ScalarField::constant(g.clone(), r)).unwrap();
            let (phi, dphi, q) = (m.phi(r).unwrap(), m.phi_prime(r).unwrap(), m.q(r).unwrap());
            for (k, n) in st.nodes.iter().enumerate() {
                let s2 = g.sin_theta(k / g.n_phi()).powi(2);
                assert_relative_eq!(n.h[0][0], phi * dphi, max_relative = 1e-14);
                assert_relative_eq!(n.h[1][1], phi * dphi * s2, max_relative = 1e-14);
                assert_eq!(n.h[0][1], 0.0);
                assert_relative_eq!(n.kappa[0], q, max_relative = 1e-13);
                assert_relative_eq!(n.kappa[1], q, max_relative = 1e-13);
                assert_relative_eq!(n.b[0][0], q, max_relative = 1e-13);
                assert!(n.b[0][1].abs() < 1e-14);
                assert_eq!(n.u, phi);
                let z = g.unit_vector(k);
                for c in 0..3 {
                    assert_relative_eq!(n.normal[c], z[c], epsilon = 1e-15);
                }
            }
        }
    }

    #[test]
    fn tilted_euclidean_graph_at_equator() {
        let g = grid(16, 32);
        let m = SpaceFormModel::euclidean();
        let rho = ScalarField::from_fn(g.clone(), |t, _| 1.0 + 0.1 * t.cos()).unwrap();
        let st = assemble(&m, &rho).unwrap();
        // Row 7 is the node nearest θ = π/2 from above (θ = 15π/32).
        let n = &st.nodes[g.index(7, 0)];
        let t = g.theta(7);
        let (r, rt) = (1.0 + 0.1 * t.cos(), -0.1 * t.sin());
        let h2 = g.h_theta().powi(2);
        assert_relative_eq!(n.g[0][0], r * r + rt * rt, epsilon = h2);
        assert_relative_eq!(r * r + rt * rt, 1.01, epsilon = 0.02);
        let u = r * r / (r * r + rt * rt).sqrt();
        assert_relative_eq!(n.u, u, epsilon = h2);
        assert_relative_eq!(1.0 / 1.01f64.sqrt(), 0.9950372, epsilon = 1e-7);
    }

    #[test]
    fn starshape_margins() {
        let g = grid(16, 32);
        let one = assemble(&SpaceFormModel::euclidean(), &ScalarField::constant(g.clone(), 1.0)).unwrap();
        assert_eq!(starshape_margin(&one), 1.0);
        let hyp = assemble(&SpaceFormModel::hyperbolic(), &ScalarField::constant(g.clone(), 0.5)).unwrap();
        assert_relative_eq!(starshape_margin(&hyp), 0.5210953054937474, epsilon = 1e-15);
        let rho = ScalarField::from_fn(g, |t, _| 1.0 + 0.1 * t.cos()).unwrap();
        let tilt = assemble(&SpaceFormModel::euclidean(), &rho).unwrap();
        let m = starshape_margin(&tilt);
        assert!(m > 0.9 && m < 1.0, "{m}");
    }

    fn wavy(g: Arc<SphereGrid>, scale: f64) -> ScalarField {
        ScalarField::from_fn(g, |t, p| {
            scale * (1.0 + 0.1 * t.cos() + 0.05 * t.sin() * p.cos() + 0.03 * (t.sin() * (2.0 * p).sin()).powi(2))
        })
        .unwrap()
    }

    #[test]
    fn euclidean_scaling_covariance() {
        let g = grid(12, 24);
        let m = SpaceFormModel::euclidean();
        let c = 2.5;
        let a = assemble(&m, &wavy(g.clone(), 1.0)).unwrap();
        let b = assemble(&m, &wavy(g, c)).unwrap();
        for (x, y) in a.nodes.iter().zip(&b.nodes) {
            for i in 0..2 {
                for j in 0..2 {
                    assert_relative_eq!(y.g[i][j], c * c * x.g[i][j], epsilon = 1e-13 * c * c * (1.0 + x.g[i][j].abs()));
                    assert_relative_eq!(y.h[i][j], c * x.h[i][j], epsilon = 1e-11 * c * (1.0 + x.h[i][j].abs()));
                }
                assert_relative_eq!(y.kappa[i], x.kappa[i] / c, max_relative = 1e-11);
            }
            assert_relative_eq!(y.u, c * x.u, max_relative = 1e-13);
        }
    }

    #[test]
    fn trace_and_determinant_of_shape_matrix() {
        let g = grid(12, 24);
        for m in models() {
            let st = assemble(&m, &wavy(g.clone(), 0.9)).unwrap();
            for n in &st.nodes {
                let tr = n.b[0][0] + n.b[1][1];
                let scale = 1.0 + n.kappa[0].abs() + n.kappa[1].abs();
                assert!((n.kappa[0] + n.kappa[1] - tr).abs() < 1e-12 * scale);
                assert!((sigma(&n.kappa, 2) - det2(&n.b)).abs() < 1e-12 * scale * scale);
                assert!(n.kappa[0] >= n.kappa[1]);
                let norm: f64 = n.normal.iter().map(|x| x * x).sum();
                assert_relative_eq!(norm, 1.0, epsilon = 1e-14);
            }
        }
    }

    #[test]
    fn support_function_bounded_by_phi() {
        let g = grid(12, 24);
        for m in models() {
            let st = assemble(&m, &wavy(g.clone(), 0.9)).unwrap();
            for n in &st.nodes {
                assert!(n.u <= n.phi);
                assert_eq!(n.u == n.phi, n.jet.grad_sq == 0.0);
            }
        }
    }

    #[test]
    fn rotation_equivariance() {
        let g = grid(12, 24);
        let m = SpaceFormModel::hyperbolic();
        let rho = wavy(g.clone(), 0.8);
        let shift = 7;
        let a = assemble(&m, &rho).unwrap();
        let b = assemble(&m, &rho.rotate_phi(shift)).unwrap();
        for i in 0..g.n_theta() {
            for j in 0..g.n_phi() {
                let x = &a.nodes[g.index(i, j)];
                let y = &b.nodes[g.index(i, (j + shift) % g.n_phi())];
                assert_eq!((x.g, x.h, x.b, x.kappa, x.u), (y.g, y.h, y.b, y.kappa, y.u));
            }
        }
    }

    #[test]
    fn rejects_out_of_domain_and_nan() {
        let g = grid(8, 16);
        let s = SpaceFormModel::spherical();
        assert!(matches!(
            assemble(&s, &ScalarField::constant(g.clone(), 1.6)),
            Err(Error::Domain { .. })
        ));
        assert!(ScalarField::new(g.clone(), vec![f64::NAN; g.len()]).is_err());
    }

    #[test]
    fn inverse_square_root() {
        let m = [[2.0, 0.3], [0.3, 0.5]];
        let r = inv_sqrt_spd2(&m);
        let back = mul2(&mul2(&r, &m), &r);
        assert_relative_eq!(back[0][0], 1.0, epsilon = 1e-14);
        assert_relative_eq!(back[1][1], 1.0, epsilon = 1e-14);
        assert!(back[0][1].abs() < 1e-14);
    }
}
