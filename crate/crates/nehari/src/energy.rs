//! The variational core: problem data, the energy functional
//!
//!   I(u) = 1/2 Σ_i ‖u_i‖²_{λ_i} - 1/(2q) Σ_i μ_i |u_i|_{2q}^{2q}
//!          - 1/q Σ_{i<j} b_ij |u_i u_j|_q^q,
//!
//! its Nehari functional τ(u) = ⟨∇I(u), u⟩, the discrete gradient with
//! respect to the quadrature inner product, and the closed-form projection
//! onto the Nehari manifold {τ = 0}.
//!
//! The quadratic part uses the compact Dirichlet form
//! [`RadialField::gradient_energy`] (forward differences against exact cell
//! measures): the centered-difference form decouples the two node parities
//! and its minimizers collapse onto one sublattice at half the energy. The
//! gradient is the exact derivative of the discrete functional, so
//! ⟨∇I(u), u⟩ and τ(u) agree to rounding, and directional derivatives match
//! finite differences of I. Its Laplacian part is the flux (finite-volume)
//! form adjoint to the Dirichlet form; it agrees with the pointwise stencil
//! of [`RadialField::laplacian`] to O(h²) away from the origin.

use std::sync::Arc;

use crate::error::Error;
use crate::grid::{pow_abs, RadialField, RadialGrid};

/// Problem data for the d-component system
/// -Δu_i + λ_i u_i = μ_i |u_i|^{2q-2} u_i + Σ_{j≠i} b_ij |u_j|^q |u_i|^{q-2} u_i.
#[derive(Debug, Clone)]
pub struct Params {
    dimension: u32,
    q: f64,
    lambda: Vec<f64>,
    mu: Vec<f64>,
    /// Row-major d×d coupling matrix; the diagonal is unused and kept at zero.
    coupling: Vec<f64>,
}

impl Params {
    pub fn new(
        dimension: u32,
        q: f64,
        lambda: Vec<f64>,
        mu: Vec<f64>,
        coupling_rows: Vec<Vec<f64>>,
    ) -> Result<Self, Error> {
        let d = lambda.len();
        if d == 0 {
            return Err(Error::invalid("lambda", "at least one component required"));
        }
        if mu.len() != d {
            return Err(Error::invalid("mu", "length must match lambda"));
        }
        if dimension < 1 {
            return Err(Error::invalid("dimension", "must be at least 1"));
        }
        if !(q.is_finite() && q > 1.0) {
            return Err(Error::invalid("q", "exponent must satisfy q > 1"));
        }
        if dimension >= 3 {
            let limit = dimension as f64 / (dimension as f64 - 2.0);
            if q >= limit {
                return Err(Error::invalid(
                    "q",
                    format!("growth condition requires q < n/(n-2) = {limit} for n = {dimension}, got q = {q}"),
                ));
            }
        }
        for (i, &l) in lambda.iter().enumerate() {
            if !(l.is_finite() && l > 0.0) {
                return Err(Error::invalid(
                    "lambda",
                    format!("lambda[{i}] must be positive, got {l}"),
                ));
            }
        }
        for (i, &m) in mu.iter().enumerate() {
            if !(m.is_finite() && m > 0.0) {
                return Err(Error::invalid(
                    "mu",
                    format!("mu[{i}] must be positive, got {m}"),
                ));
            }
        }
        if coupling_rows.len() != d || coupling_rows.iter().any(|row| row.len() != d) {
            return Err(Error::invalid("b", "coupling matrix must be d x d"));
        }
        let mut coupling = vec![0.0; d * d];
        for i in 0..d {
            for j in 0..d {
                if i == j {
                    continue;
                }
                let bij = coupling_rows[i][j];
                if !(bij.is_finite() && bij > 0.0) {
                    return Err(Error::invalid(
                        "b",
                        format!("b[{i}][{j}] must be positive, got {bij}"),
                    ));
                }
                if bij != coupling_rows[j][i] {
                    return Err(Error::invalid(
                        "b",
                        format!("coupling matrix must be symmetric: b[{i}][{j}] != b[{j}][{i}]"),
                    ));
                }
                coupling[i * d + j] = bij;
            }
        }
        Ok(Params {
            dimension,
            q,
            lambda,
            mu,
            coupling,
        })
    }

    /// All off-diagonal couplings set to the same value `b` (ignored for d = 1).
    pub fn with_uniform_coupling(
        dimension: u32,
        q: f64,
        lambda: Vec<f64>,
        mu: Vec<f64>,
        b: f64,
    ) -> Result<Self, Error> {
        let d = lambda.len();
        let rows: Vec<Vec<f64>> = (0..d)
            .map(|i| (0..d).map(|j| if i == j { 0.0 } else { b }).collect())
            .collect();
        Params::new(dimension, q, lambda, mu, rows)
    }

    pub fn d(&self) -> usize {
        self.lambda.len()
    }

    pub fn dimension(&self) -> u32 {
        self.dimension
    }

    pub fn q(&self) -> f64 {
        self.q
    }

    pub fn lambda(&self) -> &[f64] {
        &self.lambda
    }

    pub fn mu(&self) -> &[f64] {
        &self.mu
    }

    pub fn b(&self, i: usize, j: usize) -> f64 {
        self.coupling[i * self.d() + j]
    }

    /// Overwrite one symmetric off-diagonal coupling.
    pub fn set_coupling(&mut self, i: usize, j: usize, b: f64) -> Result<(), Error> {
        let d = self.d();
        if i == j || i >= d || j >= d {
            return Err(Error::invalid("b", "indices must be distinct and in range"));
        }
        if !(b.is_finite() && b > 0.0) {
            return Err(Error::invalid("b", format!("coupling must be positive, got {b}")));
        }
        self.coupling[i * d + j] = b;
        self.coupling[j * d + i] = b;
        Ok(())
    }

    /// Restriction to the components in `subset` (order preserved).
    pub fn restrict(&self, subset: &[usize]) -> Result<Params, Error> {
        if subset.is_empty() {
            return Err(Error::invalid("subset", "must be nonempty"));
        }
        let d = self.d();
        let mut seen = vec![false; d];
        for &i in subset {
            if i >= d {
                return Err(Error::invalid("subset", format!("index {i} out of range")));
            }
            if seen[i] {
                return Err(Error::invalid("subset", format!("index {i} repeated")));
            }
            seen[i] = true;
        }
        let lambda: Vec<f64> = subset.iter().map(|&i| self.lambda[i]).collect();
        let mu: Vec<f64> = subset.iter().map(|&i| self.mu[i]).collect();
        let rows: Vec<Vec<f64>> = subset
            .iter()
            .map(|&i| subset.iter().map(|&j| self.b(i, j)).collect())
            .collect();
        Params::new(self.dimension, self.q, lambda, mu, rows)
    }

    /// Relabel components by a permutation of 0..d.
    pub fn permuted(&self, perm: &[usize]) -> Result<Params, Error> {
        if perm.len() != self.d() {
            return Err(Error::invalid("perm", "must be a permutation of all components"));
        }
        self.restrict(perm)
    }

    /// Default truncation radius 20/√(min λ): a few e-folds beyond the
    /// slowest-decaying component.
    pub fn default_radius(&self) -> f64 {
        let min_lambda = self.lambda.iter().cloned().fold(f64::INFINITY, f64::min);
        20.0 / min_lambda.sqrt()
    }
}

/// A d-tuple of radial profiles on a shared grid.
#[derive(Debug, Clone)]
pub struct FieldVector {
    components: Vec<RadialField>,
}

impl FieldVector {
    pub fn new(components: Vec<RadialField>) -> Result<Self, Error> {
        if components.is_empty() {
            return Err(Error::invalid("components", "at least one required"));
        }
        let first = components[0].grid().clone();
        for c in &components[1..] {
            if !c.grid().same_layout(&first) {
                return Err(Error::GridMismatch);
            }
        }
        Ok(FieldVector { components })
    }

    pub fn zeros(grid: Arc<RadialGrid>, d: usize) -> Self {
        FieldVector {
            components: (0..d).map(|_| RadialField::zeros(grid.clone())).collect(),
        }
    }

    pub fn len(&self) -> usize {
        self.components.len()
    }

    pub fn is_empty(&self) -> bool {
        self.components.is_empty()
    }

    pub fn component(&self, i: usize) -> &RadialField {
        &self.components[i]
    }

    pub fn components(&self) -> &[RadialField] {
        &self.components
    }

    pub fn grid(&self) -> &Arc<RadialGrid> {
        self.components[0].grid()
    }

    pub fn scaled(&self, t: f64) -> FieldVector {
        FieldVector {
            components: self.components.iter().map(|c| c.scaled(t)).collect(),
        }
    }

    /// self + t * other, componentwise.
    pub fn axpy(&self, t: f64, other: &FieldVector) -> FieldVector {
        debug_assert_eq!(self.len(), other.len());
        let components = self
            .components
            .iter()
            .zip(&other.components)
            .map(|(a, b)| {
                let values: Vec<f64> = a
                    .values()
                    .iter()
                    .zip(b.values())
                    .map(|(x, y)| x + t * y)
                    .collect();
                RadialField::from_raw(a.grid().clone(), values)
            })
            .collect();
        FieldVector { components }
    }

    /// Quadrature inner product Σ_i Σ_k w_k a_i(r_k) b_i(r_k).
    pub fn dot(&self, other: &FieldVector) -> f64 {
        debug_assert_eq!(self.len(), other.len());
        let w = self.grid().weights();
        let mut total = 0.0;
        for (a, b) in self.components.iter().zip(&other.components) {
            for (k, wk) in w.iter().enumerate() {
                total += wk * a.values()[k] * b.values()[k];
            }
        }
        total
    }

    pub fn norm_sq(&self) -> f64 {
        self.dot(self)
    }

    pub fn replace_component(&mut self, i: usize, field: RadialField) {
        self.components[i] = field;
    }
}

/// The energy value with its constituent sums and the Nehari functional.
///
/// The identities value = quadratic/2 - (self + coupling)/(2q) and
/// tau = quadratic - (self + coupling) hold by construction: both are formed
/// from the same three floating-point sub-sums.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct EnergyBreakdown {
    /// Σ_i ‖u_i‖²_{λ_i}
    pub quadratic: f64,
    /// Σ_i μ_i |u_i|_{2q}^{2q}
    pub self_interaction: f64,
    /// 2 Σ_{i<j} b_ij |u_i u_j|_q^q
    pub coupling: f64,
    /// I(u)
    pub value: f64,
    /// τ(u) = ⟨∇I(u), u⟩
    pub tau: f64,
}

impl EnergyBreakdown {
    pub fn nonlinear(&self) -> f64 {
        self.self_interaction + self.coupling
    }
}

fn check_dims(p: &Params, u: &FieldVector) -> Result<(), Error> {
    if p.d() != u.len() {
        return Err(Error::DimensionMismatch {
            expected: p.d(),
            got: u.len(),
        });
    }
    Ok(())
}

/// Per-component |u_i|^q samples, shared between the self and coupling sums.
fn q_powers(p: &Params, u: &FieldVector) -> Vec<Vec<f64>> {
    let q = p.q();
    u.components()
        .iter()
        .map(|c| c.values().iter().map(|&v| pow_abs(v, q)).collect())
        .collect()
}

/// Evaluate I, τ and the three constituent sums.
pub fn evaluate(p: &Params, u: &FieldVector) -> Result<EnergyBreakdown, Error> {
    check_dims(p, u)?;
    let grid = u.grid();
    let w = grid.weights();
    let q = p.q();
    let powers = q_powers(p, u);

    let mut quadratic = 0.0;
    let mut self_interaction = 0.0;
    for (i, c) in u.components().iter().enumerate() {
        let mut norm = c.gradient_energy();
        let mut mass = 0.0;
        for k in 0..w.len() {
            let v = c.values()[k];
            norm += w[k] * p.lambda()[i] * v * v;
            let pq = powers[i][k];
            mass += w[k] * pq * pq;
        }
        quadratic += norm;
        self_interaction += p.mu()[i] * mass;
    }

    let mut coupling = 0.0;
    for i in 0..p.d() {
        for j in (i + 1)..p.d() {
            let mut overlap = 0.0;
            for k in 0..w.len() {
                overlap += w[k] * powers[i][k] * powers[j][k];
            }
            coupling += 2.0 * p.b(i, j) * overlap;
        }
    }

    let nonlinear = self_interaction + coupling;
    Ok(EnergyBreakdown {
        quadratic,
        self_interaction,
        coupling,
        value: 0.5 * quadratic - nonlinear / (2.0 * q),
        tau: quadratic - nonlinear,
    })
}

/// Action of the Dirichlet form's derivative: a_m = ∂/∂u_m (1/2 · gradient_energy),
/// the flux-form discretization of -r^{1-n} (r^{n-1} u')'. The constrained
/// boundary entry is zero.
pub(crate) fn stiffness_action(field: &RadialField) -> Vec<f64> {
    let grid = field.grid();
    let m = grid.cells();
    let h2 = grid.spacing() * grid.spacing();
    let mw = grid.cell_weights();
    let v = field.values();
    let mut a = vec![0.0; m + 1];
    a[0] = mw[0] * (v[0] - v[1]) / h2;
    for k in 1..m {
        a[k] = (mw[k - 1] * (v[k] - v[k - 1]) + mw[k] * (v[k] - v[k + 1])) / h2;
    }
    a
}

/// The solver-grade ‖u‖²_λ: compact gradient energy plus λ times the L² mass;
/// the exact quadratic sub-sum of [`evaluate`].
pub fn quadratic_form(u: &RadialField, lambda: f64) -> Result<f64, Error> {
    if !(lambda.is_finite() && lambda > 0.0) {
        return Err(Error::invalid("lambda", "must be positive and finite"));
    }
    let w = u.grid().weights();
    let mut total = u.gradient_energy();
    for (wk, v) in w.iter().zip(u.values()) {
        total += wk * lambda * v * v;
    }
    Ok(total)
}

/// Gradient of the discrete energy in the quadrature inner product: the PDE
/// residual -Δu_i + λ_i u_i - μ_i |u_i|^{2q-2} u_i - Σ_{j≠i} b_ij |u_j|^q |u_i|^{q-2} u_i,
/// with |u|^{q-2}u extended by 0 where u = 0 (continuous for q > 1).
pub fn gradient(p: &Params, u: &FieldVector) -> Result<FieldVector, Error> {
    check_dims(p, u)?;
    let grid = u.grid().clone();
    let w = grid.weights();
    let m = grid.cells();
    let powers = q_powers(p, u);
    let d = p.d();

    let mut out = Vec::with_capacity(d);
    for i in 0..d {
        let c = u.component(i);
        let a = stiffness_action(c);
        let mut g = vec![0.0; m + 1];
        for k in 0..m {
            let v = c.values()[k];
            let mut nl = 0.0;
            if v != 0.0 {
                let mut strength = p.mu()[i] * powers[i][k];
                for (j, pj) in powers.iter().enumerate() {
                    if j != i {
                        strength += p.b(i, j) * pj[k];
                    }
                }
                // powers[i][k] / v = sign(v) |v|^{q-1}
                nl = powers[i][k] / v * strength;
            }
            g[k] = a[k] / w[k] + p.lambda()[i] * v - nl;
        }
        out.push(RadialField::from_raw(grid.clone(), g));
    }
    FieldVector::new(out)
}

/// Closed-form projection onto the Nehari manifold:
/// t = (quadratic / nonlinear)^{1/(2q-2)}, so that τ(t u) = 0.
///
/// Errors when u = 0 or the nonlinear part vanishes.
pub fn nehari_project(p: &Params, u: &FieldVector) -> Result<(f64, FieldVector), Error> {
    let bd = evaluate(p, u)?;
    if bd.quadratic <= 0.0 || bd.nonlinear() <= 0.0 {
        return Err(Error::ProjectionUndefined);
    }
    let t = (bd.quadratic / bd.nonlinear()).powf(1.0 / (2.0 * p.q() - 2.0));
    if !t.is_finite() {
        return Err(Error::ProjectionUndefined);
    }
    Ok((t, u.scaled(t)))
}
