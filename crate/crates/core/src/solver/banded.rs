//! Sparse storage for the Jacobian and a banded LU factorization with
//! partial pivoting.

use crate::{Error, Result};

/// Compressed sparse row matrix.
#[derive(Debug, Clone, PartialEq)]
pub struct Csr {
    pub n: usize,
    pub row_ptr: Vec<usize>,
    pub col_idx: Vec<usize>,
    pub vals: Vec<f64>,
}

impl Csr {
    /// Zero matrix with the given sorted column pattern per row.
    pub fn with_pattern(pattern: &[Vec<usize>]) -> Self {
        let mut row_ptr = Vec::with_capacity(pattern.len() + 1);
        let mut col_idx = Vec::new();
        row_ptr.push(0);
        for cols in pattern {
            col_idx.extend_from_slice(cols);
            row_ptr.push(col_idx.len());
        }
        let nnz = col_idx.len();
        Self {
            n: pattern.len(),
            row_ptr,
            col_idx,
            vals: vec![0.0; nnz],
        }
    }

    pub fn row(&self, i: usize) -> (&[usize], &[f64]) {
        let r = self.row_ptr[i]..self.row_ptr[i + 1];
        (&self.col_idx[r.clone()], &self.vals[r])
    }

    pub fn set(&mut self, i: usize, j: usize, v: f64) {
        let r = self.row_ptr[i]..self.row_ptr[i + 1];
        let pos = self.col_idx[r.clone()]
            .binary_search(&j)
            .unwrap_or_else(|_| panic!("({i}, {j}) is outside the sparsity pattern"));
        self.vals[r.start + pos] = v;
    }

    pub fn get(&self, i: usize, j: usize) -> f64 {
        let (cols, vals) = self.row(i);
        cols.binary_search(&j).map(|p| vals[p]).unwrap_or(0.0)
    }

    pub fn matvec(&self, x: &[f64]) -> Vec<f64> {
        (0..self.n)
            .map(|i| {
                let (cols, vals) = self.row(i);
                cols.iter().zip(vals).map(|(&j, &v)| v * x[j]).sum()
            })
            .collect()
    }
}

/// `P·A = L·U` of a matrix with lower bandwidth `bl` and upper bandwidth `bu`,
/// after a symmetric reordering of unknowns and equations.
pub struct BandedLu {
    n: usize,
    bl: usize,
    bu: usize,
    /// Row `r` holds columns `r − bl ..= r + bl + bu` (the extra `bl` for pivoting fill).
    a: Vec<f64>,
    mult: Vec<f64>,
    piv: Vec<usize>,
    /// `perm[old] = new`.
    perm: Vec<usize>,
}

impl BandedLu {
    fn width(&self) -> usize {
        2 * self.bl + self.bu + 1
    }

    /// Factors `m` after renumbering index `i` as `perm[i]`.
    pub fn factor(m: &Csr, perm: &[usize]) -> Result<Self> {
        let n = m.n;
        assert_eq!(perm.len(), n);
        let (mut bl, mut bu) = (0usize, 0usize);
        for i in 0..n {
            for &j in m.row(i).0 {
                let (pi, pj) = (perm[i], perm[j]);
                if pi > pj {
                    bl = bl.max(pi - pj);
                } else {
                    bu = bu.max(pj - pi);
                }
            }
        }
        let w = 2 * bl + bu + 1;
        let mut lu = Self {
            n,
            bl,
            bu,
            a: vec![0.0; n * w],
            mult: vec![0.0; n * bl.max(1)],
            piv: vec![0; n],
            perm: perm.to_vec(),
        };
        let mut scale = 0.0f64;
        for i in 0..n {
            let (cols, vals) = m.row(i);
            for (&j, &v) in cols.iter().zip(vals) {
                let (pi, pj) = (perm[i], perm[j]);
                lu.a[pi * w + (pj + bl - pi)] = v;
                scale = scale.max(v.abs());
            }
        }
        lu.eliminate(scale)?;
        Ok(lu)
    }

    fn eliminate(&mut self, scale: f64) -> Result<()> {
        let (n, bl, bu) = (self.n, self.bl, self.bu);
        let w = self.width();
        let tiny = scale * f64::EPSILON * n as f64;
        for k in 0..n {
            let last_row = (k + bl).min(n - 1);
            let last_col = (k + bl + bu).min(n - 1);
            let at = |r: usize, c: usize| r * w + (c + bl - r);

            let mut p = k;
            let mut best = self.a[at(k, k)].abs();
            for r in k + 1..=last_row {
                let v = self.a[at(r, k)].abs();
                if v > best {
                    best = v;
                    p = r;
                }
            }
            if !(best > tiny) {
                return Err(Error::Singular(k));
            }
            self.piv[k] = p;
            if p != k {
                for c in k..=last_col {
                    self.a.swap(at(k, c), at(p, c));
                }
            }
            let pivot = self.a[at(k, k)];
            let span = last_col - k;
            for r in k + 1..=last_row {
                let factor = self.a[at(r, k)] / pivot;
                self.mult[k * bl + (r - k - 1)] = factor;
                if factor == 0.0 {
                    continue;
                }
                let (head, tail) = self.a.split_at_mut(r * w);
                let src = &head[at(k, k + 1)..at(k, k + 1) + span];
                let dst = &mut tail[(k + 1 + bl - r)..(k + 1 + bl - r) + span];
                for (d, s) in dst.iter_mut().zip(src) {
                    *d -= factor * s;
                }
            }
        }
        Ok(())
    }

    /// Solves `A x = b` in the original numbering.
    pub fn solve(&self, b: &[f64]) -> Vec<f64> {
        let (n, bl) = (self.n, self.bl);
        let w = self.width();
        let mut x = vec![0.0; n];
        for (i, &v) in b.iter().enumerate() {
            x[self.perm[i]] = v;
        }
        for k in 0..n {
            let p = self.piv[k];
            if p != k {
                x.swap(k, p);
            }
            let xk = x[k];
            if xk != 0.0 {
                for r in k + 1..=(k + bl).min(n - 1) {
                    x[r] -= self.mult[k * bl + (r - k - 1)] * xk;
                }
            }
        }
        for k in (0..n).rev() {
            let last_col = (k + bl + self.bu).min(n - 1);
            let row = &self.a[k * w..(k + 1) * w];
            let mut s = x[k];
            for c in k + 1..=last_col {
                s -= row[c + bl - k] * x[c];
            }
            x[k] = s / row[bl];
        }
        (0..n).map(|i| x[self.perm[i]]).collect()
    }

    pub fn bandwidths(&self) -> (usize, usize) {
        (self.bl, self.bu)
    }
}

/// Solves `A x = b` with one step of iterative refinement.
pub fn solve_refined(m: &Csr, lu: &BandedLu, b: &[f64]) -> Vec<f64> {
    let mut x = lu.solve(b);
    let ax = m.matvec(&x);
    let r: Vec<f64> = b.iter().zip(&ax).map(|(b, a)| b - a).collect();
    let d = lu.solve(&r);
    for (x, d) in x.iter_mut().zip(d) {
        *x += d;
    }
    x
}
