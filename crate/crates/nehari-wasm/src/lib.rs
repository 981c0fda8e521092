//! Browser demo bindings: three interactive views of the two-component
//! system with λ = (1, λ₂), μ = (1, 1) and coupling b.
//!
//! Each entry point returns a JSON string so the page needs no generated
//! glue beyond wasm-bindgen itself; errors come back as {"error": "..."}.

use serde_json::json;
use wasm_bindgen::prelude::*;

use nehari::study::{classification_scan, theta_search};
use nehari::{log_grid, scalar_solve, solve, Params, RadialGrid, SolverConfig};

fn demo_params(q: f64, lambda2: f64, b: f64, dimension: u32) -> Result<Params, nehari::Error> {
    Params::with_uniform_coupling(dimension, q, vec![1.0, lambda2], vec![1.0, 1.0], b)
}

fn demo_solver() -> SolverConfig {
    SolverConfig {
        max_iter: 4000,
        tol_residual: 1e-6,
        multistart: 1,
        tol_null: 1e-8,
        ..SolverConfig::default()
    }
}

fn err_json(e: impl std::fmt::Display) -> String {
    json!({ "error": e.to_string() }).to_string()
}

macro_rules! try_json {
    ($expr:expr) => {
        match $expr {
            Ok(v) => v,
            Err(e) => return err_json(e),
        }
    };
}

/// Solve the two-component ground state and return the radial profiles,
/// level, classification and the scalar levels for context.
#[wasm_bindgen]
pub fn ground_state(q: f64, lambda2: f64, b: f64, dimension: u32, cells: usize) -> String {
    let p = try_json!(demo_params(q, lambda2, b, dimension));
    let grid = try_json!(RadialGrid::new(
        dimension,
        p.default_radius(),
        cells.clamp(64, 4000)
    ));
    let cfg = demo_solver();
    let report = try_json!(solve(&p, &grid, &cfg, None));
    let c1 = try_json!(scalar_solve(&p, 0, &grid, &cfg)).level;
    let c2 = try_json!(scalar_solve(&p, 1, &grid, &cfg)).level;
    json!({
        "r": grid.nodes(),
        "u1": report.minimizer.component(0).values(),
        "u2": report.minimizer.component(1).values(),
        "level": report.level,
        "residual": report.residual,
        "converged": report.converged,
        "classification": report.classification.to_string(),
        "masses": report.component_mass,
        "c1": c1,
        "c2": c2,
    })
    .to_string()
}

/// Level and classification of the minimizer across a log grid of couplings:
/// the threshold picture.
#[wasm_bindgen]
pub fn coupling_scan(
    q: f64,
    lambda2: f64,
    b_min: f64,
    b_max: f64,
    points: usize,
    dimension: u32,
    cells: usize,
) -> String {
    let p = try_json!(demo_params(q, lambda2, 1.0, dimension));
    let grid = try_json!(RadialGrid::new(
        dimension,
        p.default_radius(),
        cells.clamp(64, 2000)
    ));
    let cfg = demo_solver();
    if !(b_min > 0.0 && b_max > b_min) {
        return err_json("need 0 < b_min < b_max");
    }
    let bs = log_grid(b_min, b_max, points.clamp(3, 41));
    let rows = try_json!(classification_scan(&p, &grid, &cfg, &bs));
    let c1 = try_json!(scalar_solve(&p, 0, &grid, &cfg)).level;
    let c2 = try_json!(scalar_solve(&p, 1, &grid, &cfg)).level;
    json!({
        "b": rows.iter().map(|r| r.b).collect::<Vec<_>>(),
        "level": rows.iter().map(|r| r.level).collect::<Vec<_>>(),
        "nontrivial": rows
            .iter()
            .map(|r| r.classification == nehari::Classification::Nontrivial)
            .collect::<Vec<_>>(),
        "mass2": rows.iter().map(|r| r.masses[1]).collect::<Vec<_>>(),
        "c1": c1,
        "c2": c2,
    })
    .to_string()
}

/// The energy-comparison construction across θ: lhs(θ) against the constant
/// rhs, with the (sign-safe) energy gap to the best scalar level.
#[wasm_bindgen]
pub fn construction_curve(q: f64, lambda2: f64, b: f64, dimension: u32, cells: usize) -> String {
    let p = try_json!(demo_params(q, lambda2, b, dimension));
    let grid = try_json!(RadialGrid::new(
        dimension,
        p.default_radius(),
        cells.clamp(64, 2000)
    ));
    let cfg = demo_solver();
    let (first, second) = {
        let a = try_json!(scalar_solve(&p, 0, &grid, &cfg));
        let b2 = try_json!(scalar_solve(&p, 1, &grid, &cfg));
        if a.level <= b2.level {
            (0usize, 1usize)
        } else {
            (1, 0)
        }
    };
    let p_ord = try_json!(p.permuted(&[first, second]));
    let base = try_json!(scalar_solve(&p_ord, 0, &grid, &cfg));
    let w_report = try_json!(scalar_solve(&p_ord, 1, &grid, &cfg));
    let thetas = log_grid(1e-6, 10.0, 81);
    let scan = try_json!(theta_search(
        &p_ord,
        &base,
        w_report.minimizer.component(0),
        &thetas
    ));
    json!({
        "theta": scan.evaluations.iter().map(|c| c.theta).collect::<Vec<_>>(),
        "lhs": scan.evaluations.iter().map(|c| c.lhs).collect::<Vec<_>>(),
        "rhs": scan.evaluations.first().map(|c| c.rhs).unwrap_or(0.0),
        "gap": scan.evaluations.iter().map(|c| c.energy_gap).collect::<Vec<_>>(),
        "passes": scan.evaluations.iter().map(|c| c.passes).collect::<Vec<_>>(),
        "best_theta": scan.best_construction().map(|c| c.theta),
        "base_level": base.level,
    })
    .to_string()
}
