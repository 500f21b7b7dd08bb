//! Run configuration: flat `key = value` text with dotted section prefixes.
//!
//! ```text
//! # unit sphere in Euclidean space
//! model.K = 0
//! grid.n_theta = 16
//! grid.n_phi = 32
//! problem.k = 2
//! psi.family = constant
//! psi.c = 1
//! outputs.report = out/report.txt
//! ```
//!
//! Every key is optional. Unknown keys are rejected so that typos surface.
//! Relative output paths are resolved against the directory of the file.

use std::cell::RefCell;
use std::collections::{BTreeMap, BTreeSet};
use std::path::{Path, PathBuf};
use std::str::FromStr;

use crate::prescription::{default_rho_range, Prescription};
use crate::solver::{ResidualForm, SolverOptions};
use crate::spaceform::{Curvature, SpaceFormModel, DEFAULT_DOMAIN_CAP};
use crate::{Error, Result};

struct Entries {
    values: BTreeMap<String, (String, usize)>,
    used: RefCell<BTreeSet<String>>,
}

impl Entries {
    fn parse(text: &str) -> Result<Self> {
        let mut values = BTreeMap::new();
        for (n, raw) in text.lines().enumerate() {
            let line = raw.split('#').next().unwrap_or("").trim();
            if line.is_empty() {
                continue;
            }
            let (k, v) = line
                .split_once('=')
                .ok_or_else(|| Error::Config(format!("line {}: expected 'key = value', found '{line}'", n + 1)))?;
            let (k, v) = (k.trim(), v.trim());
            if k.is_empty() {
                return Err(Error::Config(format!("line {}: empty key", n + 1)));
            }
            if let Some((_, first)) = values.insert(k.to_string(), (v.to_string(), n + 1)) {
                return Err(Error::Config(format!("line {}: key '{k}' already set on line {first}", n + 1)));
            }
        }
        Ok(Self {
            values,
            used: RefCell::new(BTreeSet::new()),
        })
    }

    fn raw(&self, key: &str) -> Option<&(String, usize)> {
        let v = self.values.get(key);
        if v.is_some() {
            self.used.borrow_mut().insert(key.to_string());
        }
        v
    }

    fn get<T: FromStr>(&self, key: &str) -> Result<Option<T>>
    where
        T::Err: std::fmt::Display,
    {
        match self.raw(key) {
            None => Ok(None),
            Some((v, line)) => v
                .parse()
                .map(Some)
                .map_err(|e| Error::Config(format!("line {line}: {key} = '{v}': {e}"))),
        }
    }

    fn get_or<T: FromStr>(&self, key: &str, default: T) -> Result<T>
    where
        T::Err: std::fmt::Display,
    {
        Ok(self.get(key)?.unwrap_or(default))
    }

    fn require<T: FromStr>(&self, key: &str) -> Result<T>
    where
        T::Err: std::fmt::Display,
    {
        self.get(key)?
            .ok_or_else(|| Error::Config(format!("missing required key '{key}'")))
    }

    fn has_prefix(&self, prefix: &str) -> bool {
        self.values.keys().any(|k| k.starts_with(prefix))
    }

    fn unused(&self) -> Vec<String> {
        let used = self.used.borrow();
        self.values.keys().filter(|k| !used.contains(*k)).cloned().collect()
    }
}

/// Description of `ψ` as read from a config, kept so reports can echo it.
#[derive(Debug, Clone, PartialEq)]
pub enum PsiSpec {
    Constant { c: f64 },
    RadialPower { c: f64, m: f64 },
    RoundTarget { r_bar: f64, m: f64 },
    Anisotropic { base: Box<PsiSpec>, eps: f64, dir: [f64; 3] },
}

impl PsiSpec {
    fn read(e: &Entries, prefix: &str) -> Result<Self> {
        let key = |name: &str| format!("{prefix}.{name}");
        let family: String = e.get_or(&key("family"), "constant".to_string())?;
        Ok(match family.as_str() {
            "constant" => PsiSpec::Constant {
                c: e.get_or(&key("c"), 1.0)?,
            },
            "radial_power" => PsiSpec::RadialPower {
                c: e.get_or(&key("c"), 1.0)?,
                m: e.require(&key("m"))?,
            },
            "round_target" => PsiSpec::RoundTarget {
                r_bar: e.require(&key("r_bar"))?,
                m: e.require(&key("m"))?,
            },
            "anisotropic" => {
                let dir = match e.raw(&key("dir")) {
                    None => [0.0, 0.0, 1.0],
                    Some((v, line)) => parse_vector(v)
                        .ok_or_else(|| Error::Config(format!("line {line}: {} must be three comma-separated numbers", key("dir"))))?,
                };
                PsiSpec::Anisotropic {
                    base: Box::new(PsiSpec::read(e, &key("base"))?),
                    eps: e.require(&key("eps"))?,
                    dir,
                }
            }
            other => {
                return Err(Error::Config(format!(
                    "{} = '{other}': expected constant, radial_power, round_target or anisotropic",
                    key("family")
                )))
            }
        })
    }

    pub fn family(&self) -> &'static str {
        match self {
            PsiSpec::Constant { .. } => "constant",
            PsiSpec::RadialPower { .. } => "radial_power",
            PsiSpec::RoundTarget { .. } => "round_target",
            PsiSpec::Anisotropic { .. } => "anisotropic",
        }
    }

    pub fn build(&self, k: usize) -> Result<Prescription> {
        let wrap = |e: Error| Error::Config(format!("psi: {e}"));
        match self {
            PsiSpec::Constant { c } => Prescription::constant(*c),
            PsiSpec::RadialPower { c, m } => Prescription::radial_power(*c, *m),
            PsiSpec::RoundTarget { r_bar, m } => Prescription::round_target(*r_bar, *m, k),
            PsiSpec::Anisotropic { base, eps, dir } => Prescription::anisotropic(base.build(k)?, *eps, *dir),
        }
        .map_err(wrap)
    }
}

fn parse_vector(v: &str) -> Option<[f64; 3]> {
    let parts: Vec<f64> = v.split(',').map(|x| x.trim().parse().ok()).collect::<Option<_>>()?;
    <[f64; 3]>::try_from(parts).ok()
}

#[derive(Debug, Clone, PartialEq)]
pub struct CheckConfig {
    pub barriers: bool,
    pub monotonicity: bool,
    pub rho_samples: usize,
    /// Radii for the monotonicity check; the barrier interval when given.
    pub rho_range: Option<(f64, f64)>,
}

#[derive(Debug, Clone, PartialEq, Default)]
pub struct Outputs {
    pub node_table: Option<PathBuf>,
    pub mesh: Option<PathBuf>,
    pub report: Option<PathBuf>,
}

#[derive(Debug, Clone, PartialEq)]
pub struct RunConfig {
    pub model: SpaceFormModel,
    pub n_theta: usize,
    pub n_phi: usize,
    pub k: usize,
    pub psi: PsiSpec,
    pub solver: SolverOptions,
    pub barriers: Option<(f64, f64)>,
    pub check: CheckConfig,
    pub outputs: Outputs,
    /// Node table read by `export`; defaults to `outputs.node_table`.
    pub export_input: Option<PathBuf>,
    pub inject_christoffel_bug: bool,
    pub verify_samples: usize,
    pub verify_seed: u64,
}

impl RunConfig {
    pub fn load(path: &Path) -> Result<Self> {
        let text = std::fs::read_to_string(path).map_err(|e| Error::Config(format!("{}: {e}", path.display())))?;
        Self::parse(&text, path.parent().unwrap_or(Path::new(".")))
    }

    pub fn parse(text: &str, base_dir: &Path) -> Result<Self> {
        let e = Entries::parse(text)?;
        let path = |key: &str| -> Result<Option<PathBuf>> {
            Ok(e.get::<String>(key)?.map(|p| base_dir.join(p)))
        };

        let sign: i32 = e.get_or("model.K", 0)?;
        let curvature = Curvature::from_sign(sign).map_err(|_| Error::Config(format!("model.K = {sign}: expected -1, 0 or 1")))?;
        let cap: f64 = e.get_or("model.cap", DEFAULT_DOMAIN_CAP)?;
        if !(cap > 0.0 && cap.is_finite()) {
            return Err(Error::Config(format!("model.cap = {cap}: must be positive")));
        }
        let model = SpaceFormModel::with_cap(curvature, cap);

        let n_theta = e.get_or("grid.n_theta", 16)?;
        let n_phi = e.get_or("grid.n_phi", 2 * n_theta)?;
        let k = e.get_or("problem.k", 2)?;
        if !(1..=2).contains(&k) {
            return Err(Error::Config(format!("problem.k = {k}: expected 1 or 2")));
        }
        let psi = PsiSpec::read(&e, "psi")?;

        let d = SolverOptions::default();
        let form: String = e.get_or("solver.residual_form", "raw".to_string())?;
        let solver = SolverOptions {
            newton_tol: e.get_or("solver.newton_tol", d.newton_tol)?,
            max_newton_iters: e.get_or("solver.max_newton_iters", d.max_newton_iters)?,
            damping: e.get_or("solver.damping", d.damping)?,
            max_backtracks: e.get_or("solver.max_backtracks", d.max_backtracks)?,
            homotopy_steps: e.get_or("solver.homotopy_steps", d.homotopy_steps)?,
            min_homotopy_step: e.get_or("solver.min_homotopy_step", d.min_homotopy_step)?,
            homotopy_tol: e.get_or("solver.homotopy_tol", d.homotopy_tol)?,
            cone_margin: e.get_or("solver.cone_margin", d.cone_margin)?,
            fd_step: e.get_or("solver.fd_step", d.fd_step)?,
            residual_form: match form.as_str() {
                "raw" => ResidualForm::Raw,
                "normalized" => ResidualForm::Normalized,
                other => return Err(Error::Config(format!("solver.residual_form = '{other}': expected raw or normalized"))),
            },
            check_jacobian: e.get_or("solver.check_jacobian", d.check_jacobian)?,
        };
        solver.validate().map_err(|err| Error::Config(err.to_string()))?;

        let barriers = match (e.get::<f64>("barriers.R1")?, e.get::<f64>("barriers.R2")?) {
            (Some(r1), Some(r2)) => Some((r1, r2)),
            (None, None) => None,
            _ => return Err(Error::Config("barriers.R1 and barriers.R2 must be given together".into())),
        };
        let rho_range = match (e.get::<f64>("check.rho_min")?, e.get::<f64>("check.rho_max")?) {
            (Some(a), Some(b)) => Some((a, b)),
            (None, None) => barriers,
            _ => return Err(Error::Config("check.rho_min and check.rho_max must be given together".into())),
        };
        let check = CheckConfig {
            barriers: e.get_or("check.barriers", true)?,
            monotonicity: e.get_or("check.monotonicity", true)?,
            rho_samples: e.get_or("check.rho_samples", crate::prescription::DEFAULT_RHO_SAMPLES)?,
            rho_range,
        };
        let outputs = Outputs {
            node_table: path("outputs.node_table")?,
            mesh: path("outputs.mesh")?,
            report: path("outputs.report")?,
        };
        let export_input = path("export.input")?;
        let inject_christoffel_bug = e.get_or("verify.inject_christoffel_bug", false)?;
        let verify_samples = e.get_or("verify.samples", 1000)?;
        let verify_seed = e.get_or("verify.seed", 7)?;

        let unused = e.unused();
        if !unused.is_empty() {
            let hint = if e.has_prefix("psi.") { " (family parameters depend on psi.family)" } else { "" };
            return Err(Error::Config(format!("unknown keys: {}{hint}", unused.join(", "))));
        }
        Ok(Self {
            model,
            n_theta,
            n_phi,
            k,
            psi,
            solver,
            barriers,
            check,
            outputs,
            export_input,
            inject_christoffel_bug,
            verify_samples,
            verify_seed,
        })
    }

    /// Radii sampled by the monotonicity check.
    pub fn monotonicity_range(&self) -> (f64, f64) {
        self.check.rho_range.unwrap_or_else(|| default_rho_range(&self.model))
    }
}
