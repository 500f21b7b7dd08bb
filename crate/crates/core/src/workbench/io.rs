//! Node tables, meshes and `key = value` reports.

use std::fmt::Write as _;
use std::fs;
use std::path::Path;
use std::sync::Arc;

use crate::geometry::GeometryState;
use crate::grid::{ScalarField, SphereGrid};
use crate::{Error, Result};

pub const NODE_TABLE_HEADER: &str = "theta,phi,rho,kappa1,kappa2,u,residual";

fn io_error(path: &Path, source: std::io::Error) -> Error {
    Error::Io {
        path: path.to_path_buf(),
        source,
    }
}

pub fn write_text(path: &Path, text: &str) -> Result<()> {
    if let Some(dir) = path.parent().filter(|d| !d.as_os_str().is_empty()) {
        fs::create_dir_all(dir).map_err(|e| io_error(dir, e))?;
    }
    fs::write(path, text).map_err(|e| io_error(path, e))
}

pub fn read_text(path: &Path) -> Result<String> {
    fs::read_to_string(path).map_err(|e| io_error(path, e))
}

/// One row per node in θ-major order, every value with 17 significant digits.
pub fn node_table(state: &GeometryState, residual: &[f64]) -> String {
    let grid = &state.grid;
    let mut out = String::with_capacity(140 * grid.len());
    out.push_str(NODE_TABLE_HEADER);
    out.push('\n');
    for (idx, n) in state.nodes.iter().enumerate() {
        let (theta, phi) = grid.angles(idx);
        let _ = writeln!(
            out,
            "{theta:.16e},{phi:.16e},{:.16e},{:.16e},{:.16e},{:.16e},{:.16e}",
            n.rho, n.kappa[0], n.kappa[1], n.u, residual[idx]
        );
    }
    out
}

/// Reads the `rho` column of a node table written for `grid`.
pub fn read_node_table(text: &str, grid: Arc<SphereGrid>) -> Result<ScalarField> {
    let bad = |line: usize, what: String| Error::Config(format!("node table line {line}: {what}"));
    let mut lines = text.lines().enumerate().filter(|(_, l)| !l.trim().is_empty());
    match lines.next() {
        Some((_, h)) if h.trim() == NODE_TABLE_HEADER => {}
        Some((n, h)) => return Err(bad(n + 1, format!("expected header '{NODE_TABLE_HEADER}', found '{h}'"))),
        None => return Err(Error::Config("node table is empty".into())),
    }
    let mut rho = Vec::with_capacity(grid.len());
    for (n, line) in lines {
        let cols: Vec<&str> = line.split(',').map(str::trim).collect();
        if cols.len() != 7 {
            return Err(bad(n + 1, format!("expected 7 columns, found {}", cols.len())));
        }
        let num = |c: usize| {
            cols[c]
                .parse::<f64>()
                .map_err(|e| bad(n + 1, format!("column {}: {e}", c + 1)))
        };
        let idx = rho.len();
        if idx >= grid.len() {
            return Err(bad(n + 1, format!("more rows than the {} grid nodes", grid.len())));
        }
        let (theta, phi) = grid.angles(idx);
        if (num(0)? - theta).abs() > 1e-12 || (num(1)? - phi).abs() > 1e-12 {
            return Err(bad(
                n + 1,
                format!(
                    "node angles do not match a {}x{} grid",
                    grid.n_theta(),
                    grid.n_phi()
                ),
            ));
        }
        rho.push(num(2)?);
    }
    if rho.len() != grid.len() {
        return Err(Error::Config(format!(
            "node table has {} rows, grid has {} nodes",
            rho.len(),
            grid.len()
        )));
    }
    ScalarField::new(grid, rho)
}

/// Plain-text polygon mesh of the embedding `x = ρ(z)·z`: one vertex per
/// node, one vertex per pole, quads between rings and triangle fans at the
/// poles. Indices are 1-based.
pub fn mesh(rho: &ScalarField, curvature_sign: i32) -> String {
    let grid = rho.grid();
    let (nt, np) = (grid.n_theta(), grid.n_phi());
    let v = rho.values();
    let mut out = String::new();
    let _ = writeln!(out, "# radial graph, K = {curvature_sign}, vertices at rho(z) * z");
    for idx in 0..grid.len() {
        let z = grid.unit_vector(idx);
        let _ = writeln!(out, "v {:.16e} {:.16e} {:.16e}", v[idx] * z[0], v[idx] * z[1], v[idx] * z[2]);
    }
    let ring_mean = |i: usize| v[i * np..(i + 1) * np].iter().sum::<f64>() / np as f64;
    let north = grid.len() + 1;
    let south = grid.len() + 2;
    let _ = writeln!(out, "v 0 0 {:.16e}", ring_mean(0));
    let _ = writeln!(out, "v 0 0 {:.16e}", -ring_mean(nt - 1));
    let id = |i: usize, j: usize| grid.index(i, j % np) + 1;
    for j in 0..np {
        let _ = writeln!(out, "f {north} {} {}", id(0, j), id(0, j + 1));
    }
    for i in 0..nt - 1 {
        for j in 0..np {
            let _ = writeln!(out, "f {} {} {} {}", id(i, j), id(i + 1, j), id(i + 1, j + 1), id(i, j + 1));
        }
    }
    for j in 0..np {
        let _ = writeln!(out, "f {south} {} {}", id(nt - 1, j + 1), id(nt - 1, j));
    }
    out
}

/// Ordered `key = value` lines.
#[derive(Debug, Clone, Default)]
pub struct Report {
    entries: Vec<(String, String)>,
}

impl Report {
    pub fn push(&mut self, key: impl Into<String>, value: impl ToString) {
        self.entries.push((key.into(), value.to_string()));
    }

    /// Floats are written with 17 significant digits.
    pub fn push_f64(&mut self, key: impl Into<String>, value: f64) {
        self.push(key, format!("{value:.16e}"));
    }

    pub fn get(&self, key: &str) -> Option<&str> {
        self.entries.iter().find(|(k, _)| k == key).map(|(_, v)| v.as_str())
    }

    pub fn render(&self) -> String {
        self.entries.iter().map(|(k, v)| format!("{k} = {v}\n")).collect()
    }

    pub fn parse(text: &str) -> Result<Self> {
        let mut entries = Vec::new();
        for (n, line) in text.lines().enumerate() {
            let line = line.trim();
            if line.is_empty() || line.starts_with('#') {
                continue;
            }
            let (k, v) = line
                .split_once('=')
                .ok_or_else(|| Error::Config(format!("report line {}: missing '='", n + 1)))?;
            entries.push((k.trim().to_string(), v.trim().to_string()));
        }
        Ok(Self { entries })
    }
}
