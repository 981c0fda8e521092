//! Output files are written once and atomically: content goes to a temporary
//! sibling first, then a rename moves it in place.

use std::fs;
use std::path::{Path, PathBuf};

use anyhow::{Context, Result};

use nehari::csv::format_f64;
use nehari::SolveReport;

pub fn write_atomic(path: &Path, content: &str) -> Result<()> {
    if let Some(dir) = path.parent() {
        fs::create_dir_all(dir)
            .with_context(|| format!("cannot create output dir {}", dir.display()))?;
    }
    let tmp: PathBuf = path.with_extension("tmp");
    fs::write(&tmp, content).with_context(|| format!("cannot write {}", tmp.display()))?;
    fs::rename(&tmp, path).with_context(|| format!("cannot move into {}", path.display()))?;
    Ok(())
}

/// Structured text block for a solve outcome.
pub fn report_text(command: &str, report: &SolveReport) -> String {
    let mut out = String::new();
    out.push_str(&format!("command: {command}\n"));
    out.push_str(&format!(
        "status: {}\n",
        if report.converged {
            "converged"
        } else {
            "not-converged"
        }
    ));
    out.push_str(&format!("level: {}\n", format_f64(report.level)));
    out.push_str(&format!("residual: {}\n", format_f64(report.residual)));
    out.push_str(&format!("tau: {}\n", format_f64(report.energy.tau)));
    out.push_str(&format!(
        "quadratic: {}\n",
        format_f64(report.energy.quadratic)
    ));
    out.push_str(&format!(
        "self_interaction: {}\n",
        format_f64(report.energy.self_interaction)
    ));
    out.push_str(&format!("coupling: {}\n", format_f64(report.energy.coupling)));
    out.push_str(&format!("classification: {}\n", report.classification));
    let masses: Vec<String> = report.component_mass.iter().map(|m| format_f64(*m)).collect();
    out.push_str(&format!("component_mass: [{}]\n", masses.join(", ")));
    out.push_str(&format!(
        "boundary_value: {}\n",
        format_f64(report.boundary_value)
    ));
    out.push_str(&format!("iterations: {}\n", report.iterations));
    out.push_str(&format!("co_minimizers: {}\n", report.co_minimizers.len()));
    out
}
