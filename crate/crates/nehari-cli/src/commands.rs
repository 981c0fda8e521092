//! The six workflows behind the subcommands. Exit codes are a stable
//! contract: 0 success, 1 configuration error, 2 non-convergence, 3 invalid
//! bisection bracket, 4 audit violation.

use std::path::{Path, PathBuf};

use anyhow::{anyhow, Result};
use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;
use rayon::prelude::*;

use nehari::csv::{self, format_f64};
use nehari::rearrange::{audit_against, rearrange_all};
use nehari::study::{classification_scan, theta_search, threshold_scan, ScanRow};
use nehari::{induction_audit, subsystem_solve, Error, RadialField, SolveReport};

use crate::config::RunConfig;
use crate::output::{report_text, write_atomic};

pub const EXIT_OK: i32 = 0;
pub const EXIT_CONFIG: i32 = 1;
pub const EXIT_NONCONVERGENCE: i32 = 2;
pub const EXIT_BRACKET: i32 = 3;
pub const EXIT_AUDIT: i32 = 4;

fn out_path(cfg: &RunConfig, name: &str) -> PathBuf {
    Path::new(&cfg.run.out_dir).join(name)
}

fn finish(report: &SolveReport) -> i32 {
    if report.converged {
        EXIT_OK
    } else {
        EXIT_NONCONVERGENCE
    }
}

pub fn cmd_solve(cfg: &RunConfig) -> Result<i32> {
    let p = cfg.params()?;
    let grid = cfg.grid(&p)?;
    let report = nehari::solve(&p, &grid, &cfg.solver(), None)?;
    let text = report_text("solve", &report);
    write_atomic(&out_path(cfg, "report.txt"), &text)?;
    write_atomic(&out_path(cfg, "fields.csv"), &csv::fields_csv(&report.minimizer))?;
    write_atomic(&out_path(cfg, "trace.csv"), &csv::trace_csv(&report.trace))?;
    print!("{text}");
    Ok(finish(&report))
}

pub fn cmd_scalar(cfg: &RunConfig) -> Result<i32> {
    let p = cfg.params()?;
    let grid = cfg.grid(&p)?;
    let index = cfg.scalar.component;
    if index == 0 || index > p.d() {
        return Err(anyhow!(
            "scalar.component must lie in 1..={}, got {index}",
            p.d()
        ));
    }
    let report = nehari::scalar_solve(&p, index - 1, &grid, &cfg.solver())?;
    let text = report_text(&format!("scalar (component {index})"), &report);
    write_atomic(&out_path(cfg, "report.txt"), &text)?;
    write_atomic(&out_path(cfg, "field.csv"), &csv::fields_csv(&report.minimizer))?;
    print!("{text}");
    Ok(finish(&report))
}

pub fn cmd_subsystems(cfg: &RunConfig) -> Result<i32> {
    let p = cfg.params()?;
    let grid = cfg.grid(&p)?;
    let d = p.d();
    if d < 2 {
        return Err(anyhow!("subsystems needs at least two components"));
    }
    let solver = cfg.solver();
    let mut rows = Vec::new();
    let mut all_converged = true;
    for omitted in 0..d {
        let subset: Vec<usize> = (0..d).filter(|&i| i != omitted).collect();
        let report = subsystem_solve(&p, &subset, &grid, &solver)?;
        all_converged &= report.converged;
        rows.push((subset, report.level, report.classification.to_string()));
    }
    let min = rows
        .iter()
        .map(|r| r.1)
        .fold(f64::INFINITY, f64::min);
    let content = csv::subsystems_csv(&rows);
    write_atomic(&out_path(cfg, "subsystems.csv"), &content)?;
    print!("{content}");
    println!("min_subsystem_level: {}", format_f64(min));
    Ok(if all_converged { EXIT_OK } else { EXIT_NONCONVERGENCE })
}

pub fn cmd_theta_search(cfg: &RunConfig) -> Result<i32> {
    let p = cfg.params()?;
    let grid = cfg.grid(&p)?;
    let d = p.d();
    if d < 2 {
        return Err(anyhow!("theta-search needs at least two components"));
    }
    let solver = cfg.solver();
    let base_subset: Vec<usize> = (0..d - 1).collect();
    let base = if d == 2 {
        nehari::scalar_solve(&p, 0, &grid, &solver)?
    } else {
        subsystem_solve(&p, &base_subset, &grid, &solver)?
    };
    let w_report = nehari::scalar_solve(&p, d - 1, &grid, &solver)?;
    if !base.converged || !w_report.converged {
        return Ok(EXIT_NONCONVERGENCE);
    }
    let w: &RadialField = w_report.minimizer.component(0);
    let scan = theta_search(&p, &base, w, &cfg.theta_grid())?;
    write_atomic(&out_path(cfg, "theta.csv"), &csv::theta_csv(&scan))?;

    let mut text = String::from("command: theta-search\n");
    text.push_str(&format!("base_level: {}\n", format_f64(base.level)));
    match scan.best_construction() {
        Some(c) => {
            text.push_str(&format!("theta: {}\n", format_f64(c.theta)));
            text.push_str(&format!("t: {}\n", format_f64(c.t)));
            text.push_str(&format!("lhs: {}\n", format_f64(c.lhs)));
            text.push_str(&format!("rhs: {}\n", format_f64(c.rhs)));
            text.push_str(&format!("energy_new: {}\n", format_f64(c.energy_new)));
            text.push_str(&format!("energy_gap: {}\n", format_f64(c.energy_gap)));
            text.push_str("passes: true\n");
        }
        None => text.push_str("passes: false\n"),
    }
    write_atomic(&out_path(cfg, "construction.txt"), &text)?;
    print!("{text}");
    Ok(EXIT_OK)
}

pub fn cmd_threshold(cfg: &RunConfig) -> Result<i32> {
    let p = cfg.params()?;
    let grid = cfg.grid(&p)?;
    let solver = cfg.solver();
    let section = &cfg.threshold;
    if section.scan.is_empty() && section.bracket.is_empty() {
        return Err(anyhow!("threshold needs a scan range and/or a bracket"));
    }

    let mut scan_rows: Vec<ScanRow> = Vec::new();
    if !section.scan.is_empty() {
        if section.scan.len() != 2 || section.scan_points < 2 {
            return Err(anyhow!("threshold.scan must be [b_min, b_max] with scan_points >= 2"));
        }
        let bs = nehari::log_grid(section.scan[0], section.scan[1], section.scan_points);
        let pool = rayon::ThreadPoolBuilder::new()
            .num_threads(cfg.run.workers)
            .build()?;
        let results: Result<Vec<Vec<ScanRow>>, Error> = pool.install(|| {
            bs.par_iter()
                .map(|&b| classification_scan(&p, &grid, &solver, &[b]))
                .collect()
        });
        scan_rows = results?.into_iter().flatten().collect();
        write_atomic(&out_path(cfg, "scan.csv"), &csv::scan_csv(&scan_rows))?;
    }

    if !section.bracket.is_empty() {
        if section.bracket.len() != 2 {
            return Err(anyhow!("threshold.bracket must be [b_lo, b_hi]"));
        }
        let bracket = (section.bracket[0], section.bracket[1]);
        match threshold_scan(&p, &grid, &solver, bracket, section.width) {
            Ok(report) => {
                write_atomic(&out_path(cfg, "bisect.csv"), &csv::scan_csv(&report.trace))?;
                let text = format!(
                    "command: threshold\nbracket_lo: {}\nbracket_hi: {}\nwidth: {}\nevaluations: {}\n",
                    format_f64(report.bracket.0),
                    format_f64(report.bracket.1),
                    format_f64(report.bracket.1 - report.bracket.0),
                    report.trace.len()
                );
                write_atomic(&out_path(cfg, "bracket.txt"), &text)?;
                print!("{text}");
            }
            Err(Error::InvalidBracket {
                b_lo,
                b_hi,
                lo_class,
                hi_class,
                reports,
            }) => {
                eprintln!(
                    "invalid bracket: b_lo = {b_lo} classified {lo_class}, b_hi = {b_hi} classified {hi_class}"
                );
                eprint!("{}", report_text("threshold (b_lo endpoint)", &reports.0));
                eprint!("{}", report_text("threshold (b_hi endpoint)", &reports.1));
                return Ok(EXIT_BRACKET);
            }
            Err(e) => return Err(e.into()),
        }
    } else if !scan_rows.is_empty() {
        // scan only: summarize the classifications
        let nontrivial = scan_rows
            .iter()
            .filter(|r| r.classification == nehari::Classification::Nontrivial)
            .count();
        println!(
            "scan: {}/{} couplings classified nontrivial",
            nontrivial,
            scan_rows.len()
        );
    }
    Ok(EXIT_OK)
}

pub fn cmd_audit(cfg: &RunConfig) -> Result<i32> {
    let p = cfg.params()?;
    let grid = cfg.grid(&p)?;
    let solver = cfg.solver();
    let mut rng = ChaCha8Rng::seed_from_u64(solver.seed);
    let mut rows = Vec::new();
    let mut violations = 0usize;

    for _ in 0..cfg.audit.fields {
        let u = nehari::synth::random_field_vector(&grid, p.d(), &mut rng);
        let mut star = rearrange_all(&u);
        if cfg.audit.corrupt_rearrangement {
            let mut vals = star.component(0).values().to_vec();
            vals[0] *= 0.25;
            star.replace_component(0, RadialField::new(grid.clone(), vals)?);
        }
        let report = audit_against(&p, &u, &star)?;
        violations += report.violations().len();
        rows.extend(report.rows);
    }
    let report = nehari::AuditReport { rows };
    write_atomic(&out_path(cfg, "audit.csv"), &csv::audit_csv(&report))?;
    println!(
        "inequality audit: {} rows, {} violations",
        report.rows.len(),
        violations
    );
    if violations > 0 {
        for row in report.violations().iter().take(20) {
            eprintln!(
                "violation: {} lhs={} rhs={} slack={}",
                row.check.name(),
                format_f64(row.lhs),
                format_f64(row.rhs),
                format_f64(row.slack)
            );
        }
        return Ok(EXIT_AUDIT);
    }

    if cfg.audit.induction {
        if p.q() < 2.0 && p.d() >= 2 {
            let report = induction_audit(&p, &grid, &solver, &cfg.theta_grid())?;
            let mut text = String::from("command: audit (induction)\n");
            for (subset, level) in report.subsets.iter().zip(&report.subsystem_levels) {
                let label: Vec<String> = subset.iter().map(|i| (i + 1).to_string()).collect();
                text.push_str(&format!(
                    "subsystem {}: {}\n",
                    label.join("+"),
                    format_f64(*level)
                ));
            }
            text.push_str(&format!(
                "min_subsystem_level: {}\n",
                format_f64(report.min_subsystem_level)
            ));
            if let Some(c) = &report.construction {
                text.push_str(&format!("theta: {}\n", format_f64(c.theta)));
                text.push_str(&format!("energy_new: {}\n", format_f64(c.energy_new)));
                text.push_str(&format!("energy_gap: {}\n", format_f64(c.energy_gap)));
            }
            text.push_str(&format!("full_level: {}\n", format_f64(report.full.level)));
            text.push_str(&format!("full_classification: {}\n", report.full.classification));
            text.push_str(&format!("ok: {}\n", report.ok()));
            write_atomic(&out_path(cfg, "induction.txt"), &text)?;
            print!("{text}");
            if !report.ok() {
                return Ok(EXIT_AUDIT);
            }
        } else {
            println!("induction audit skipped: needs 1 < q < 2 and d >= 2");
        }
    }
    Ok(EXIT_OK)
}
