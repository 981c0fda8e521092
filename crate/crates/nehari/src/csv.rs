//! Plain-text output formats. All floating-point numbers are printed with 17
//! significant digits so repeated runs diff cleanly.

use crate::energy::FieldVector;
use crate::rearrange::AuditReport;
use crate::solver::TracePoint;
use crate::study::{ScanRow, ThetaScan};

pub fn format_f64(x: f64) -> String {
    format!("{x:.16e}")
}

/// Field dump: header `r,u1,...,ud`, one row per node.
pub fn fields_csv(u: &FieldVector) -> String {
    let mut out = String::from("r");
    for i in 1..=u.len() {
        out.push_str(&format!(",u{i}"));
    }
    out.push('\n');
    let nodes = u.grid().nodes();
    for (k, &r) in nodes.iter().enumerate() {
        out.push_str(&format_f64(r));
        for c in u.components() {
            out.push(',');
            out.push_str(&format_f64(c.values()[k]));
        }
        out.push('\n');
    }
    out
}

/// Iteration trace: `iter,energy,residual`.
pub fn trace_csv(trace: &[TracePoint]) -> String {
    let mut out = String::from("iter,energy,residual\n");
    for (i, p) in trace.iter().enumerate() {
        out.push_str(&format!(
            "{i},{},{}\n",
            format_f64(p.energy),
            format_f64(p.residual)
        ));
    }
    out
}

/// Audit rows: `check,component,pair,lhs,rhs,slack,violation`.
pub fn audit_csv(report: &AuditReport) -> String {
    let mut out = String::from("check,component,pair,lhs,rhs,slack,violation\n");
    for row in &report.rows {
        let comp = row
            .component
            .map(|i| (i + 1).to_string())
            .unwrap_or_default();
        let pair = row
            .pair
            .map(|(i, j)| format!("{}-{}", i + 1, j + 1))
            .unwrap_or_default();
        out.push_str(&format!(
            "{},{comp},{pair},{},{},{},{}\n",
            row.check.name(),
            format_f64(row.lhs),
            format_f64(row.rhs),
            format_f64(row.slack),
            format_f64(row.violation())
        ));
    }
    out
}

/// Coupling scan rows sorted by b: `b,level,classification,mass1,...`.
pub fn scan_csv(rows: &[ScanRow]) -> String {
    let mut sorted: Vec<&ScanRow> = rows.iter().collect();
    sorted.sort_by(|a, b| a.b.partial_cmp(&b.b).expect("finite couplings"));
    let d = sorted.first().map(|r| r.masses.len()).unwrap_or(0);
    let mut out = String::from("b,level,classification");
    for i in 1..=d {
        out.push_str(&format!(",mass{i}"));
    }
    out.push('\n');
    for row in sorted {
        out.push_str(&format!(
            "{},{},{}",
            format_f64(row.b),
            format_f64(row.level),
            row.classification
        ));
        for m in &row.masses {
            out.push(',');
            out.push_str(&format_f64(*m));
        }
        out.push('\n');
    }
    out
}

/// θ-scan rows: `theta,t,lhs,rhs,passes,energy_new,energy_gap`.
pub fn theta_csv(scan: &ThetaScan) -> String {
    let mut out = String::from("theta,t,lhs,rhs,passes,energy_new,energy_gap\n");
    for c in &scan.evaluations {
        out.push_str(&format!(
            "{},{},{},{},{},{},{}\n",
            format_f64(c.theta),
            format_f64(c.t),
            format_f64(c.lhs),
            format_f64(c.rhs),
            c.passes,
            format_f64(c.energy_new),
            format_f64(c.energy_gap)
        ));
    }
    out
}

/// Subsystem levels: `subset,level,classification`.
pub fn subsystems_csv(rows: &[(Vec<usize>, f64, String)]) -> String {
    let mut out = String::from("subset,level,classification\n");
    for (subset, level, class) in rows {
        let label: Vec<String> = subset.iter().map(|i| (i + 1).to_string()).collect();
        out.push_str(&format!(
            "{},{},{}\n",
            label.join("+"),
            format_f64(*level),
            class
        ));
    }
    out
}
