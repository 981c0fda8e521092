//! Discrete Schwarz symmetrization: the decreasing radial rearrangement
//! u ↦ u*, plus numerical audits of the inequalities it satisfies
//! (L^p preservation, Pólya–Szegő, Hardy–Littlewood, and the resulting
//! τ comparison).
//!
//! The rearrangement sorts the (|u_k|, w_k) value–measure pairs by decreasing
//! value and reads the resulting step function back at the grid's cumulative
//! measure coordinates. Equimeasurability therefore holds up to a single cell
//! of measure, and a field that is already nonnegative and nonincreasing is
//! reproduced exactly.

use crate::energy::{evaluate, FieldVector, Params};
use crate::error::Error;
use crate::grid::{pow_abs, RadialField};

/// A rearranged profile together with the verified monotonicity flag.
#[derive(Debug, Clone)]
pub struct RearrangedField {
    field: RadialField,
    monotone_certificate: bool,
}

impl RearrangedField {
    pub fn field(&self) -> &RadialField {
        &self.field
    }

    pub fn into_field(self) -> RadialField {
        self.field
    }

    pub fn monotone_certificate(&self) -> bool {
        self.monotone_certificate
    }

    /// Wrap an arbitrary field without rearranging. Exists for fault
    /// injection in audit drivers; the certificate is re-verified, not
    /// assumed.
    pub fn new_unchecked(field: RadialField) -> Self {
        let monotone = is_nonincreasing(field.values());
        RearrangedField {
            field,
            monotone_certificate: monotone,
        }
    }
}

fn is_nonincreasing(values: &[f64]) -> bool {
    values.windows(2).all(|p| p[1] <= p[0]) && values.iter().all(|&v| v >= 0.0)
}

/// Decreasing radial rearrangement of |u| onto the same grid.
pub fn rearrange(u: &RadialField) -> RearrangedField {
    let grid = u.grid().clone();
    let w = grid.weights();
    let m = grid.cells();

    // value–measure pairs, sorted by decreasing value; the sort is stable so
    // ties keep grid order and the map is deterministic.
    let mut pairs: Vec<(f64, f64)> = u
        .values()
        .iter()
        .zip(w)
        .map(|(&v, &wk)| (v.abs(), wk))
        .collect();
    pairs.sort_by(|a, b| b.0.partial_cmp(&a.0).expect("finite samples"));

    // Read the decreasing step function V(m) at the measure coordinate of
    // each node: V on [W_{j-1}, W_j) equals pairs[j].0.
    let mut out = vec![0.0; m + 1];
    let mut j = 0usize;
    let mut pool_cum = pairs[0].1;
    let mut node_cum = 0.0;
    for k in 0..=m {
        while j + 1 < pairs.len() && node_cum >= pool_cum {
            j += 1;
            pool_cum += pairs[j].1;
        }
        out[k] = pairs[j].0;
        node_cum += w[k];
    }
    // the outermost node carries the smallest value, so Dirichlet data stays
    // Dirichlet
    out[m] = pairs[m].0;

    let field = RadialField::new(grid, out).expect("rearranged samples are finite");
    debug_assert!(is_nonincreasing(field.values()));
    RearrangedField {
        monotone_certificate: is_nonincreasing(field.values()),
        field,
    }
}

/// Rearrange every component of a field vector.
pub fn rearrange_all(u: &FieldVector) -> FieldVector {
    let components = u
        .components()
        .iter()
        .map(|c| rearrange(c).into_field())
        .collect();
    FieldVector::new(components).expect("same grid preserved")
}

/// What a single audit row checks.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum AuditCheck {
    /// |u*|_2^2 vs |u|_2^2 (equality within slack)
    MassL2,
    /// |u*|_{2q}^{2q} vs |u|_{2q}^{2q} (equality within slack)
    MassL2q,
    /// |∇u*|_2^2 ≤ |∇|u||_2^2 + slack (Pólya–Szegő)
    GradientNorm,
    /// |u_i u_j|_q^q ≤ |u_i* u_j*|_q^q + slack (Hardy–Littlewood)
    MixedTerm,
    /// τ(u*) ≤ τ(u) + slack
    Tau,
}

impl AuditCheck {
    pub fn name(&self) -> &'static str {
        match self {
            AuditCheck::MassL2 => "mass_l2",
            AuditCheck::MassL2q => "mass_l2q",
            AuditCheck::GradientNorm => "gradient_norm",
            AuditCheck::MixedTerm => "mixed_term",
            AuditCheck::Tau => "tau",
        }
    }

    /// Equality checks fail on |lhs - rhs| > slack; inequality checks only on
    /// lhs > rhs + slack.
    pub fn two_sided(&self) -> bool {
        matches!(self, AuditCheck::MassL2 | AuditCheck::MassL2q)
    }
}

/// One inequality instance: `lhs` compared against `rhs` with tolerance `slack`.
#[derive(Debug, Clone)]
pub struct AuditRow {
    pub check: AuditCheck,
    pub component: Option<usize>,
    pub pair: Option<(usize, usize)>,
    pub lhs: f64,
    pub rhs: f64,
    pub slack: f64,
}

impl AuditRow {
    pub fn violation(&self) -> f64 {
        if self.check.two_sided() {
            ((self.lhs - self.rhs).abs() - self.slack).max(0.0)
        } else {
            (self.lhs - self.rhs - self.slack).max(0.0)
        }
    }

    pub fn ok(&self) -> bool {
        self.violation() == 0.0
    }
}

#[derive(Debug, Clone)]
pub struct AuditReport {
    pub rows: Vec<AuditRow>,
}

impl AuditReport {
    pub fn violations(&self) -> Vec<&AuditRow> {
        self.rows.iter().filter(|r| !r.ok()).collect()
    }

    pub fn ok(&self) -> bool {
        self.rows.iter().all(|r| r.ok())
    }
}

/// Relative quadrature tolerance for the audit bands.
pub const TAU_QUAD: f64 = 1e-6;
/// Grid-resolution coefficient of the Pólya–Szegő / Hardy–Littlewood band:
/// resampled finite differences are only O(h)-faithful under rearrangement.
pub const AUDIT_GRID_COEFF: f64 = 4.0;

/// Audit the rearrangement inequalities for `u` against the supplied
/// rearrangements (normally `rearrange_all(u)`, but callers may tamper with
/// them to exercise failure paths).
pub fn audit_against(p: &Params, u: &FieldVector, rearranged: &FieldVector) -> Result<AuditReport, Error> {
    if u.len() != rearranged.len() {
        return Err(Error::DimensionMismatch {
            expected: u.len(),
            got: rearranged.len(),
        });
    }
    let q = p.q();
    let grid = u.grid();
    let h = grid.spacing();
    let max_w = grid.weights().iter().cloned().fold(0.0, f64::max);
    let mut rows = Vec::new();

    for (i, (c, cs)) in u.components().iter().zip(rearranged.components()).enumerate() {
        // L^p masses: preserved up to quadrature rounding plus one cell of
        // measure at the top value.
        for (check, p_exp) in [(AuditCheck::MassL2, 2.0), (AuditCheck::MassL2q, 2.0 * q)] {
            let lhs = cs.lp_norm(p_exp)?.powf(p_exp);
            let rhs = c.lp_norm(p_exp)?.powf(p_exp);
            let quantization = max_w * pow_abs(c.max_abs(), p_exp);
            rows.push(AuditRow {
                check,
                component: Some(i),
                pair: None,
                lhs,
                rhs,
                slack: TAU_QUAD * lhs.abs().max(rhs.abs()) + quantization,
            });
        }

        // Pólya–Szegő on the modulus: |∇u*|² ≤ |∇|u||² within the O(h) band.
        let abs_field = RadialField::new(
            c.grid().clone(),
            c.values().iter().map(|v| v.abs()).collect(),
        )?;
        let lhs = grad_sq(cs);
        let rhs = grad_sq(&abs_field);
        let scale = lhs.abs().max(rhs.abs()).max(1e-300);
        rows.push(AuditRow {
            check: AuditCheck::GradientNorm,
            component: Some(i),
            pair: None,
            lhs,
            rhs,
            slack: (TAU_QUAD + AUDIT_GRID_COEFF * h) * scale,
        });
    }

    for i in 0..u.len() {
        for j in (i + 1)..u.len() {
            let lhs = crate::grid::mixed_term(u.component(i), u.component(j), q)?;
            let rhs = crate::grid::mixed_term(rearranged.component(i), rearranged.component(j), q)?;
            let quantization =
                max_w * pow_abs(u.component(i).max_abs() * u.component(j).max_abs(), q);
            rows.push(AuditRow {
                check: AuditCheck::MixedTerm,
                component: None,
                pair: Some((i, j)),
                lhs,
                rhs,
                slack: TAU_QUAD * lhs.abs().max(rhs.abs()).max(1e-300) + quantization,
            });
        }
    }

    // τ comparison, on the natural scale of the quadratic part.
    let before = evaluate(p, u)?;
    let after = evaluate(p, rearranged)?;
    rows.push(AuditRow {
        check: AuditCheck::Tau,
        component: None,
        pair: None,
        lhs: after.tau,
        rhs: before.tau,
        slack: (TAU_QUAD + AUDIT_GRID_COEFF * h) * before.quadratic.max(1e-300),
    });

    Ok(AuditReport { rows })
}

/// Rearrange `u` and audit the inequalities the symmetrization step relies on.
pub fn audit_inequalities(p: &Params, u: &FieldVector) -> Result<AuditReport, Error> {
    let rearranged = rearrange_all(u);
    audit_against(p, u, &rearranged)
}

// the compact Dirichlet form, matching the energy module's convention so the
// τ row is implied by the other rows
fn grad_sq(f: &RadialField) -> f64 {
    f.gradient_energy()
}

/// |∇|f||₂² and |∇f|₂²; discretely the first never exceeds the second
/// (triangle inequality node by node). Relevant only for sign-changing inputs.
pub fn abs_gradient_comparison(f: &RadialField) -> (f64, f64) {
    let abs_field = RadialField::new(
        f.grid().clone(),
        f.values().iter().map(|v| v.abs()).collect(),
    )
    .expect("modulus keeps Dirichlet data");
    (grad_sq(&abs_field), grad_sq(f))
}
