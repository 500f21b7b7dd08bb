//! Finite-difference Jacobian of the residual, assembled column group by
//! column group with a coloring of the stencil graph.

use crate::grid::{ScalarField, SphereGrid};
use crate::Result;

use super::banded::Csr;

/// Sorted, deduplicated stencil footprint of every node: the unknowns the
/// residual at that node depends on.
pub fn sparsity(grid: &SphereGrid) -> Vec<Vec<usize>> {
    (0..grid.len())
        .map(|idx| {
            let mut cols = grid.stencil(idx).to_vec();
            cols.sort_unstable();
            cols.dedup();
            cols
        })
        .collect()
}

/// Greedy coloring of the columns so that no row depends on two columns of
/// the same color. Returns the column lists of each color.
pub fn color_columns(pattern: &[Vec<usize>]) -> Vec<Vec<usize>> {
    let n = pattern.len();
    let mut rows_of = vec![Vec::new(); n];
    for (i, cols) in pattern.iter().enumerate() {
        for &j in cols {
            rows_of[j].push(i);
        }
    }
    let mut color = vec![usize::MAX; n];
    let mut groups: Vec<Vec<usize>> = Vec::new();
    let mut taken = Vec::new();
    for j in 0..n {
        taken.clear();
        taken.resize(groups.len(), false);
        for &i in &rows_of[j] {
            for &other in &pattern[i] {
                if color[other] != usize::MAX {
                    taken[color[other]] = true;
                }
            }
        }
        let c = taken.iter().position(|t| !t).unwrap_or(groups.len());
        if c == groups.len() {
            groups.push(Vec::new());
        }
        color[j] = c;
        groups[c].push(j);
    }
    groups
}

/// Unknown ordering that keeps the φ-periodic wrap inside the band: within
/// each colatitude ring the longitudes are visited as `0, n−1, 1, n−2, …`.
pub fn folded_order(grid: &SphereGrid) -> Vec<usize> {
    let np = grid.n_phi();
    let slot = |j: usize| if 2 * j < np { 2 * j } else { 2 * (np - 1 - j) + 1 };
    (0..grid.len())
        .map(|idx| {
            let (i, j) = grid.row_col(idx);
            i * np + slot(j)
        })
        .collect()
}

/// Sparsity, coloring and ordering of one grid, reused across Newton steps.
#[derive(Debug, Clone)]
pub struct JacobianLayout {
    pub pattern: Vec<Vec<usize>>,
    pub colors: Vec<Vec<usize>>,
    pub order: Vec<usize>,
}

impl JacobianLayout {
    pub fn new(grid: &SphereGrid) -> Self {
        let pattern = sparsity(grid);
        let colors = color_columns(&pattern);
        Self {
            pattern,
            colors,
            order: folded_order(grid),
        }
    }
}

/// Step used for unknown `x`: `fd_step·max(|x|, 1)`.
pub fn fd_increment(fd_step: f64, x: f64) -> f64 {
    fd_step * x.abs().max(1.0)
}

/// Central-difference Jacobian of `residual` at `rho`, two residual
/// evaluations per color.
pub fn assemble_jacobian<R>(
    layout: &JacobianLayout,
    rho: &ScalarField,
    fd_step: f64,
    mut residual: R,
) -> Result<Csr>
where
    R: FnMut(&ScalarField) -> Result<Vec<f64>>,
{
    let grid = rho.grid().clone();
    let base = rho.values();
    let mut rows_of = vec![Vec::new(); base.len()];
    for (i, cols) in layout.pattern.iter().enumerate() {
        for &j in cols {
            rows_of[j].push(i);
        }
    }
    let mut jac = Csr::with_pattern(&layout.pattern);
    let mut plus = base.to_vec();
    let mut minus = base.to_vec();
    for group in &layout.colors {
        for &j in group {
            let h = fd_increment(fd_step, base[j]);
            plus[j] = base[j] + h;
            minus[j] = base[j] - h;
        }
        let rp = residual(&ScalarField::new(grid.clone(), plus.clone())?)?;
        let rm = residual(&ScalarField::new(grid.clone(), minus.clone())?)?;
        for &j in group {
            let width = plus[j] - minus[j];
            for &i in &rows_of[j] {
                jac.set(i, j, (rp[i] - rm[i]) / width);
            }
            plus[j] = base[j];
            minus[j] = base[j];
        }
    }
    Ok(jac)
}
