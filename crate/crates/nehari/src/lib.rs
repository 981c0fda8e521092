//! Ground states of coupled nonlinear Schrödinger systems
//!
//!   -Δu_i + λ_i u_i = μ_i |u_i|^{2q-2} u_i + Σ_{j≠i} b_ij |u_j|^q |u_i|^{q-2} u_i,
//!   u_i ∈ H¹(R^n), i = 1..d,
//!
//! computed by minimizing the energy over the Nehari manifold on a truncated
//! radial grid. The crate provides the discrete radial calculus, the energy
//! and its exact discrete gradient, Schwarz rearrangement with inequality
//! audits, the projected-descent solver, and an experiment layer for
//! subsystem energy comparisons and coupling-threshold scans.

pub mod csv;
pub mod energy;
pub mod error;
pub mod grid;
pub mod rearrange;
pub mod solver;
pub mod study;
pub mod synth;

pub use energy::{evaluate, gradient, nehari_project, EnergyBreakdown, FieldVector, Params};
pub use error::Error;
pub use grid::{mixed_term, RadialField, RadialGrid};
pub use rearrange::{audit_inequalities, rearrange, AuditReport, RearrangedField};
pub use solver::{
    scalar_level, scalar_solve, solve, subsystem_solve, Classification, SolveReport, SolverConfig,
};
pub use study::{
    classification_scan, default_theta_grid, induction_audit, log_grid, test_function_check,
    theta_search, threshold_scan, InductionReport, ScanRow, TestConstruction, ThetaScan,
    ThresholdReport,
};
