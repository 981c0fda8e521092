//! Experiment layer: the subsystem energy-comparison construction, its
//! θ-search, the induction audit over subsystem levels, and coupling-threshold
//! location by classification bisection.
//!
//! Given a ground state (u_1, .., u_{d-1}) of the first d-1 equations and a
//! profile w for the last slot, the scaled tuple (t u_1, .., t u_{d-1}, t θ w)
//! lands on the Nehari manifold for the closed-form t with
//!
//!   t^{2q-2} (1 + μ_d θ^{2q} C2 + 2 Σ_i b_id θ^q D_i) = 1 + θ² C1,
//!
//! and its energy drops below the subsystem level exactly when
//!
//!   ((1 + θ² C1)^q - 1 - μ_d θ^{2q} C2) / θ^q  <  2 Σ_i b_id D_i.
//!
//! For q close to 2 the passing window shrinks like (rhs/(q C1))^{1/(2-q)},
//! so the energy difference is far below the rounding of the energies
//! themselves; the gap is therefore evaluated in log space (ln1p/expm1) and
//! keeps its sign at any representable θ.

use std::sync::Arc;

use crate::energy::{evaluate, nehari_project, quadratic_form, FieldVector, Params};
use crate::error::Error;
use crate::grid::{mixed_term, RadialField, RadialGrid};
use crate::solver::{scalar_solve, solve, subsystem_solve, Classification, SolveReport, SolverConfig};

/// One evaluation of the test-function construction at a fixed θ.
#[derive(Debug, Clone)]
pub struct TestConstruction {
    pub theta: f64,
    /// Projection scalar putting the assembled tuple on the manifold.
    pub t: f64,
    /// ‖w‖²_{λ_d} / S with S = Σ ‖u_i‖²_{λ_i} of the base.
    pub c1: f64,
    /// |w|_{2q}^{2q} / S.
    pub c2: f64,
    /// D_i = |u_i w|_q^q / S.
    pub d_constants: Vec<f64>,
    /// ((1 + θ²C1)^q - 1 - μ_d θ^{2q} C2)/θ^q.
    pub lhs: f64,
    /// 2 Σ_i b_id D_i.
    pub rhs: f64,
    /// Energy of the assembled tuple.
    pub energy_new: f64,
    /// Level of the (re-projected) base.
    pub energy_base: f64,
    /// energy_new - energy_base via log-space evaluation; trustworthy sign
    /// even when the difference is below the rounding of the energies.
    pub energy_gap: f64,
    /// τ of the assembled tuple (should vanish to rounding).
    pub tau_new: f64,
    /// lhs < rhs.
    pub passes: bool,
}

/// Relative tolerance for requiring the base to sit on the manifold.
const BASE_TAU_TOL: f64 = 1e-6;

/// Assemble and evaluate the construction at one θ.
///
/// `base` must be a converged, nontrivial report for the first d-1 components
/// of `p` (it is re-projected exactly before use), and `w` a nonzero profile
/// for the last component.
pub fn test_function_check(
    p: &Params,
    base: &SolveReport,
    w: &RadialField,
    theta: f64,
) -> Result<TestConstruction, Error> {
    let d = p.d();
    if d < 2 || base.minimizer.len() != d - 1 {
        return Err(Error::DimensionMismatch {
            expected: d.saturating_sub(1),
            got: base.minimizer.len(),
        });
    }
    if base.classification != Classification::Nontrivial {
        return Err(Error::BaseNotNontrivial);
    }
    let tau_bound = BASE_TAU_TOL * base.energy.quadratic.abs();
    if base.energy.tau.abs() > tau_bound {
        return Err(Error::BaseOffManifold {
            tau: base.energy.tau.abs(),
            bound: tau_bound,
        });
    }
    if !w.grid().same_layout(base.minimizer.grid()) {
        return Err(Error::GridMismatch);
    }
    if w.values().iter().all(|&v| v == 0.0) {
        return Err(Error::ZeroTestFunction);
    }
    if !(theta.is_finite() && theta > 0.0) {
        return Err(Error::invalid("theta", "must be positive"));
    }

    let q = p.q();
    let sub_indices: Vec<usize> = (0..d - 1).collect();
    let p_base = p.restrict(&sub_indices)?;

    // re-project so the manifold identities hold to rounding, not merely to
    // the solver tolerance
    let (_, base_fields) = nehari_project(&p_base, &base.minimizer)?;
    let base_bd = evaluate(&p_base, &base_fields)?;
    let s = base_bd.quadratic;

    let c1 = quadratic_form(w, p.lambda()[d - 1])? / s;
    let c2 = w.lp_norm(2.0 * q)?.powf(2.0 * q) / s;
    let mut d_constants = Vec::with_capacity(d - 1);
    for i in 0..d - 1 {
        d_constants.push(mixed_term(base_fields.component(i), w, q)? / s);
    }

    let mu_d = p.mu()[d - 1];
    let coupling_sum: f64 = d_constants
        .iter()
        .enumerate()
        .map(|(i, di)| p.b(i, d - 1) * di)
        .sum();
    let theta_q = theta.powf(q);
    let theta_2q = theta_q * theta_q;
    // nonlinear excess A of the new slot, relative to the base's share
    let a = mu_d * theta_2q * c2 + 2.0 * theta_q * coupling_sum;
    let log_quad = (theta * theta * c1).ln_1p();
    let log_nonlin = a.ln_1p();
    let t = ((log_quad - log_nonlin) / (2.0 * q - 2.0)).exp();

    // assembled tuple and its direct evaluation
    let mut fields: Vec<RadialField> = base_fields
        .components()
        .iter()
        .map(|c| c.scaled(t))
        .collect();
    fields.push(w.scaled(t * theta));
    let assembled = FieldVector::new(fields)?;
    let new_bd = evaluate(p, &assembled)?;

    let factor = 0.5 - 1.0 / (2.0 * q);
    let energy_base = base_bd.value;
    // δ = t²(1 + θ²C1) - 1 in log space
    let delta = ((q / (q - 1.0)) * log_quad - log_nonlin / (q - 1.0)).exp_m1();
    let energy_gap = factor * s * delta;

    let lhs = ((q * log_quad).exp_m1() - mu_d * theta_2q * c2) / theta_q;
    let rhs = 2.0 * coupling_sum;

    debug_assert!(new_bd.tau.abs() <= 1e-8 * new_bd.quadratic.abs().max(1e-300));

    Ok(TestConstruction {
        theta,
        t,
        c1,
        c2,
        d_constants,
        lhs,
        rhs,
        energy_new: new_bd.value,
        energy_base,
        energy_gap,
        tau_new: new_bd.tau,
        passes: lhs < rhs,
    })
}

/// All constructions over a θ grid plus the index of the best passing one
/// (most negative energy gap). `best` is `None` when no θ passes.
#[derive(Debug, Clone)]
pub struct ThetaScan {
    pub evaluations: Vec<TestConstruction>,
    pub best: Option<usize>,
}

impl ThetaScan {
    pub fn best_construction(&self) -> Option<&TestConstruction> {
        self.best.map(|i| &self.evaluations[i])
    }
}

/// Evaluate the construction on a θ grid and pick the passing θ of least
/// energy. An empty result is a value, not an error.
pub fn theta_search(
    p: &Params,
    base: &SolveReport,
    w: &RadialField,
    thetas: &[f64],
) -> Result<ThetaScan, Error> {
    let mut evaluations = Vec::with_capacity(thetas.len());
    for &theta in thetas {
        evaluations.push(test_function_check(p, base, w, theta)?);
    }
    let mut best: Option<usize> = None;
    for (i, c) in evaluations.iter().enumerate() {
        if !c.passes {
            continue;
        }
        match best {
            None => best = Some(i),
            Some(j) => {
                if c.energy_gap < evaluations[j].energy_gap {
                    best = Some(i);
                }
            }
        }
    }
    Ok(ThetaScan { evaluations, best })
}

/// Geometric grid from `lo` to `hi` inclusive.
pub fn log_grid(lo: f64, hi: f64, points: usize) -> Vec<f64> {
    assert!(points >= 2 && lo > 0.0 && hi > lo);
    let ratio = (hi / lo).ln();
    (0..points)
        .map(|i| lo * (ratio * i as f64 / (points - 1) as f64).exp())
        .collect()
}

/// The default θ grid: 61 log-spaced points on [1e-4, 10].
pub fn default_theta_grid() -> Vec<f64> {
    log_grid(1e-4, 10.0, 61)
}

/// Everything the induction step produces for one parameter set.
#[derive(Debug, Clone)]
pub struct InductionReport {
    pub subsets: Vec<Vec<usize>>,
    pub subsystem_levels: Vec<f64>,
    pub min_subsystem_level: f64,
    pub argmin_subset: Vec<usize>,
    pub omitted: usize,
    /// Best passing construction, if any θ passed.
    pub construction: Option<TestConstruction>,
    pub full: SolveReport,
    /// The construction exists and undercuts the minimal subsystem level.
    pub construction_undercuts: bool,
    /// full.level ≤ energy_new (within 1e-8 relative slack).
    pub full_below_construction: bool,
    pub full_nontrivial: bool,
}

impl InductionReport {
    pub fn ok(&self) -> bool {
        self.construction_undercuts && self.full_below_construction && self.full_nontrivial
    }
}

/// Solve every (d-1)-subsystem, run the θ-search from the minimal one with w
/// the scalar ground state of the omitted component, and check that the full
/// system undercuts it with a nontrivial ground state. Requires 1 < q < 2.
pub fn induction_audit(
    p: &Params,
    grid: &Arc<RadialGrid>,
    cfg: &SolverConfig,
    thetas: &[f64],
) -> Result<InductionReport, Error> {
    if p.q() >= 2.0 {
        return Err(Error::RequiresSubquadratic(p.q()));
    }
    let d = p.d();
    if d < 2 {
        return Err(Error::invalid("d", "induction needs at least two components"));
    }

    let mut subsets = Vec::with_capacity(d);
    let mut reports = Vec::with_capacity(d);
    for omitted in 0..d {
        let subset: Vec<usize> = (0..d).filter(|&i| i != omitted).collect();
        let report = subsystem_solve(p, &subset, grid, cfg)?;
        subsets.push(subset);
        reports.push(report);
    }
    let levels: Vec<f64> = reports.iter().map(|r| r.level).collect();
    let mut argmin = 0;
    for i in 1..d {
        if levels[i] < levels[argmin] {
            argmin = i;
        }
    }
    let min_level = levels[argmin];
    let argmin_subset = subsets[argmin].clone();
    let omitted = (0..d).find(|i| !argmin_subset.contains(i)).expect("one left out");

    // relabel so the minimal subsystem occupies the first d-1 slots
    let mut perm = argmin_subset.clone();
    perm.push(omitted);
    let p_perm = p.permuted(&perm)?;

    let w_report = scalar_solve(p, omitted, grid, cfg)?;
    let w = w_report.minimizer.component(0);

    let scan = theta_search(&p_perm, &reports[argmin], w, thetas)?;
    let construction = scan.best_construction().cloned();
    let construction_undercuts = construction
        .as_ref()
        .map(|c| c.passes && c.energy_gap < 0.0)
        .unwrap_or(false);

    let full = solve(p, grid, cfg, None)?;
    let full_below_construction = match &construction {
        Some(c) => full.level <= c.energy_new + 1e-8 * min_level.abs(),
        None => false,
    };
    let full_nontrivial = full.classification == Classification::Nontrivial;

    Ok(InductionReport {
        subsets,
        subsystem_levels: levels,
        min_subsystem_level: min_level,
        argmin_subset,
        omitted,
        construction,
        full,
        construction_undercuts,
        full_below_construction,
        full_nontrivial,
    })
}

/// One classification sample of the two-component system at coupling b.
#[derive(Debug, Clone)]
pub struct ScanRow {
    pub b: f64,
    pub level: f64,
    pub classification: Classification,
    pub masses: Vec<f64>,
}

fn solve_at_coupling(
    p: &Params,
    b: f64,
    grid: &Arc<RadialGrid>,
    cfg: &SolverConfig,
) -> Result<(ScanRow, SolveReport), Error> {
    let mut pb = p.clone();
    pb.set_coupling(0, 1, b)?;
    let report = solve(&pb, grid, cfg, None)?;
    Ok((
        ScanRow {
            b,
            level: report.level,
            classification: report.classification.clone(),
            masses: report.component_mass.clone(),
        },
        report,
    ))
}

/// Classify the two-component minimizer across a list of couplings.
pub fn classification_scan(
    p: &Params,
    grid: &Arc<RadialGrid>,
    cfg: &SolverConfig,
    couplings: &[f64],
) -> Result<Vec<ScanRow>, Error> {
    if p.d() != 2 {
        return Err(Error::RequiresTwoComponents(p.d()));
    }
    couplings
        .iter()
        .map(|&b| solve_at_coupling(p, b, grid, cfg).map(|(row, _)| row))
        .collect()
}

/// Bisection output: the final bracket and every classification sample taken.
#[derive(Debug, Clone)]
pub struct ThresholdReport {
    pub bracket: (f64, f64),
    pub trace: Vec<ScanRow>,
}

/// Locate the coupling threshold for d = 2 by bisection on the minimizer's
/// classification. The bracket must be validated by a semitrivial
/// classification at b_lo and a nontrivial one at b_hi.
pub fn threshold_scan(
    p: &Params,
    grid: &Arc<RadialGrid>,
    cfg: &SolverConfig,
    bracket: (f64, f64),
    width: f64,
) -> Result<ThresholdReport, Error> {
    if p.d() != 2 {
        return Err(Error::RequiresTwoComponents(p.d()));
    }
    let (mut lo, mut hi) = bracket;
    if !(lo > 0.0 && hi > lo && width > 0.0) {
        return Err(Error::invalid("bracket", "need 0 < b_lo < b_hi and width > 0"));
    }

    let (lo_row, lo_report) = solve_at_coupling(p, lo, grid, cfg)?;
    let (hi_row, hi_report) = solve_at_coupling(p, hi, grid, cfg)?;
    let lo_nontrivial = lo_row.classification == Classification::Nontrivial;
    let hi_nontrivial = hi_row.classification == Classification::Nontrivial;
    if lo_nontrivial || !hi_nontrivial {
        return Err(Error::InvalidBracket {
            b_lo: lo,
            b_hi: hi,
            lo_class: lo_row.classification.to_string(),
            hi_class: hi_row.classification.to_string(),
            reports: Box::new((lo_report, hi_report)),
        });
    }

    let mut trace = vec![lo_row, hi_row];
    while hi - lo > width {
        let mid = 0.5 * (lo + hi);
        let (row, _) = solve_at_coupling(p, mid, grid, cfg)?;
        if row.classification == Classification::Nontrivial {
            hi = mid;
        } else {
            lo = mid;
        }
        trace.push(row);
    }

    Ok(ThresholdReport {
        bracket: (lo, hi),
        trace,
    })
}
