//! Run configuration: a single TOML file, versioned by `schema_version`,
//! with `--set key=value` dotted-path overrides applied before
//! deserialization. All randomness downstream flows from `[solver] seed`.

use std::path::Path;
use std::sync::Arc;

use anyhow::{anyhow, bail, Context, Result};
use serde::Deserialize;

use nehari::{Params, RadialGrid, SolverConfig};

pub const SCHEMA_VERSION: i64 = 1;

#[derive(Debug, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct RunConfig {
    pub schema_version: i64,
    pub problem: ProblemConfig,
    pub grid: GridConfig,
    #[serde(default)]
    pub solver: SolverSection,
    #[serde(default)]
    pub run: RunSection,
    #[serde(default)]
    pub scalar: ScalarSection,
    #[serde(default)]
    pub theta: ThetaSection,
    #[serde(default)]
    pub threshold: ThresholdSection,
    #[serde(default)]
    pub audit: AuditSection,
}

#[derive(Debug, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct ProblemConfig {
    /// Spatial dimension n ≥ 1.
    pub dimension: u32,
    /// Nonlinearity exponent; must satisfy 1 < q, and q < n/(n-2) for n ≥ 3.
    pub q: f64,
    pub lambda: Vec<f64>,
    pub mu: Vec<f64>,
    /// Scalar (uniform off-diagonal) or full d×d matrix; omit for d = 1.
    #[serde(default)]
    pub coupling: Coupling,
}

#[derive(Debug, Deserialize)]
#[serde(untagged)]
pub enum Coupling {
    Uniform(f64),
    Matrix(Vec<Vec<f64>>),
}

impl Default for Coupling {
    fn default() -> Self {
        Coupling::Uniform(1.0)
    }
}

#[derive(Debug, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct GridConfig {
    /// Truncation radius; 0 or omitted means the default 20/√(min λ).
    #[serde(default)]
    pub radius: f64,
    pub cells: usize,
}

#[derive(Debug, Deserialize)]
#[serde(deny_unknown_fields, default)]
pub struct SolverSection {
    pub max_iter: usize,
    pub tol_residual: f64,
    pub step0: f64,
    pub armijo_backtrack: f64,
    pub armijo_decrease: f64,
    pub symmetrize_every: usize,
    pub multistart: usize,
    pub seed: u64,
    pub tol_null: f64,
}

impl Default for SolverSection {
    fn default() -> Self {
        let d = SolverConfig::default();
        SolverSection {
            max_iter: d.max_iter,
            tol_residual: d.tol_residual,
            step0: d.step0,
            armijo_backtrack: d.armijo_backtrack,
            armijo_decrease: d.armijo_decrease,
            symmetrize_every: d.symmetrize_every,
            multistart: d.multistart,
            seed: d.seed,
            tol_null: d.tol_null,
        }
    }
}

#[derive(Debug, Deserialize)]
#[serde(deny_unknown_fields, default)]
pub struct RunSection {
    /// Worker threads for independent solves in scans; 0 = all cores.
    pub workers: usize,
    pub out_dir: String,
}

impl Default for RunSection {
    fn default() -> Self {
        RunSection {
            workers: 0,
            out_dir: "out".into(),
        }
    }
}

#[derive(Debug, Deserialize)]
#[serde(deny_unknown_fields, default)]
pub struct ScalarSection {
    /// 1-based component index.
    pub component: usize,
}

impl Default for ScalarSection {
    fn default() -> Self {
        ScalarSection { component: 1 }
    }
}

#[derive(Debug, Deserialize)]
#[serde(deny_unknown_fields, default)]
pub struct ThetaSection {
    pub min: f64,
    pub max: f64,
    pub points: usize,
}

impl Default for ThetaSection {
    fn default() -> Self {
        ThetaSection {
            min: 1e-4,
            max: 10.0,
            points: 61,
        }
    }
}

#[derive(Debug, Deserialize)]
#[serde(deny_unknown_fields, default)]
pub struct ThresholdSection {
    /// Bisection bracket [b_lo, b_hi]; empty disables bisection.
    pub bracket: Vec<f64>,
    pub width: f64,
    /// Log-spaced classification scan range [b_min, b_max]; empty disables.
    pub scan: Vec<f64>,
    pub scan_points: usize,
}

impl Default for ThresholdSection {
    fn default() -> Self {
        ThresholdSection {
            bracket: vec![],
            width: 0.01,
            scan: vec![],
            scan_points: 13,
        }
    }
}

#[derive(Debug, Deserialize)]
#[serde(deny_unknown_fields, default)]
pub struct AuditSection {
    /// Number of random field vectors in the inequality suite.
    pub fields: usize,
    /// Also run the induction audit (needs 1 < q < 2 and d ≥ 2).
    pub induction: bool,
    /// Fault-injection hook: tamper with the rearranged fields so the audit
    /// must fail.
    pub corrupt_rearrangement: bool,
}

impl Default for AuditSection {
    fn default() -> Self {
        AuditSection {
            fields: 100,
            induction: true,
            corrupt_rearrangement: false,
        }
    }
}

/// Parse the file, apply `--set` overrides, deserialize and validate.
pub fn load(path: &Path, overrides: &[String]) -> Result<RunConfig> {
    let text = std::fs::read_to_string(path)
        .with_context(|| format!("cannot read config {}", path.display()))?;
    let table: toml::Table = text
        .parse()
        .map_err(|e| anyhow!("config {}: {e}", path.display()))?;
    let mut value = toml::Value::Table(table);
    for spec in overrides {
        apply_override(&mut value, spec)?;
    }
    let config: RunConfig = value
        .try_into()
        .map_err(|e| anyhow!("config {}: {e}", path.display()))?;
    if config.schema_version != SCHEMA_VERSION {
        bail!(
            "unsupported schema_version {} (expected {SCHEMA_VERSION})",
            config.schema_version
        );
    }
    Ok(config)
}

/// Apply one `a.b.c=value` override; the value is parsed as TOML.
fn apply_override(root: &mut toml::Value, spec: &str) -> Result<()> {
    let (path, raw) = spec
        .split_once('=')
        .ok_or_else(|| anyhow!("override '{spec}' is not of the form key=value"))?;
    let parsed: toml::Value = format!("v = {raw}")
        .parse::<toml::Table>()
        .map(|t| t["v"].clone())
        .or_else(|_| {
            format!("v = \"{raw}\"")
                .parse::<toml::Table>()
                .map(|t| t["v"].clone())
        })
        .map_err(|e| anyhow!("override '{spec}': cannot parse value: {e}"))?;

    let keys: Vec<&str> = path.trim().split('.').collect();
    let mut node = root;
    for key in &keys[..keys.len() - 1] {
        node = node
            .as_table_mut()
            .ok_or_else(|| anyhow!("override '{spec}': {key} is not a table"))?
            .entry(key.to_string())
            .or_insert(toml::Value::Table(Default::default()));
    }
    node.as_table_mut()
        .ok_or_else(|| anyhow!("override '{spec}': parent is not a table"))?
        .insert(keys[keys.len() - 1].to_string(), parsed);
    Ok(())
}

impl RunConfig {
    pub fn params(&self) -> Result<Params> {
        let p = &self.problem;
        let result = match &p.coupling {
            Coupling::Uniform(b) => {
                Params::with_uniform_coupling(p.dimension, p.q, p.lambda.clone(), p.mu.clone(), *b)
            }
            Coupling::Matrix(rows) => Params::new(
                p.dimension,
                p.q,
                p.lambda.clone(),
                p.mu.clone(),
                rows.clone(),
            ),
        };
        result.map_err(|e| anyhow!("inadmissible problem: {e}"))
    }

    pub fn grid(&self, params: &Params) -> Result<Arc<RadialGrid>> {
        let radius = if self.grid.radius > 0.0 {
            self.grid.radius
        } else {
            params.default_radius()
        };
        RadialGrid::new(params.dimension(), radius, self.grid.cells)
            .map_err(|e| anyhow!("invalid grid: {e}"))
    }

    pub fn solver(&self) -> SolverConfig {
        let s = &self.solver;
        SolverConfig {
            max_iter: s.max_iter,
            tol_residual: s.tol_residual,
            step0: s.step0,
            armijo_backtrack: s.armijo_backtrack,
            armijo_decrease: s.armijo_decrease,
            symmetrize_every: s.symmetrize_every,
            multistart: s.multistart,
            seed: s.seed,
            tol_null: s.tol_null,
        }
    }

    pub fn theta_grid(&self) -> Vec<f64> {
        nehari::log_grid(self.theta.min, self.theta.max, self.theta.points.max(2))
    }
}
