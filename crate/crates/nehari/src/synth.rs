//! Synthetic radial profiles for randomized audits and tests.
//!
//! Profiles are defined in continuum coordinates so the same draw can be
//! sampled onto grids of different resolution, which is what refinement
//! studies need.

use std::sync::Arc;

use rand::Rng;

use crate::energy::FieldVector;
use crate::grid::{RadialField, RadialGrid};

/// A piecewise-linear profile given by (r, value) knots on [0, R].
#[derive(Debug, Clone)]
pub struct PiecewiseProfile {
    knots: Vec<(f64, f64)>,
}

impl PiecewiseProfile {
    /// Random knot values in [-amplitude, amplitude] at uniformly random
    /// radii; the endpoints sit at r = 0 and r = R with the outer value 0.
    pub fn random(rng: &mut impl Rng, radius: f64, interior_knots: usize, amplitude: f64) -> Self {
        let mut radii: Vec<f64> = (0..interior_knots)
            .map(|_| rng.gen_range(0.0..radius))
            .collect();
        radii.push(0.0);
        radii.push(radius);
        radii.sort_by(|a, b| a.partial_cmp(b).unwrap());
        radii.dedup();
        let n = radii.len();
        let knots: Vec<(f64, f64)> = radii
            .into_iter()
            .enumerate()
            .map(|(i, r)| {
                let v = if i + 1 == n {
                    0.0
                } else {
                    rng.gen_range(-amplitude..amplitude)
                };
                (r, v)
            })
            .collect();
        PiecewiseProfile { knots }
    }

    pub fn value(&self, r: f64) -> f64 {
        let ks = &self.knots;
        if r <= ks[0].0 {
            return ks[0].1;
        }
        for pair in ks.windows(2) {
            let (r0, v0) = pair[0];
            let (r1, v1) = pair[1];
            if r <= r1 {
                if r1 == r0 {
                    return v1;
                }
                let s = (r - r0) / (r1 - r0);
                return v0 + s * (v1 - v0);
            }
        }
        ks[ks.len() - 1].1
    }

    pub fn sample(&self, grid: &Arc<RadialGrid>) -> RadialField {
        RadialField::from_fn(grid.clone(), |r| self.value(r))
    }
}

/// A sum of Gaussian bumps; smooth, for derivative-sensitive tests.
#[derive(Debug, Clone)]
pub struct BumpProfile {
    bumps: Vec<(f64, f64, f64)>, // (amplitude, center, inverse width)
}

impl BumpProfile {
    pub fn random(rng: &mut impl Rng, radius: f64, bumps: usize, amplitude: f64) -> Self {
        let list = (0..bumps)
            .map(|_| {
                (
                    rng.gen_range(-amplitude..amplitude),
                    rng.gen_range(0.0..0.6 * radius),
                    rng.gen_range(0.3..2.0),
                )
            })
            .collect();
        BumpProfile { bumps: list }
    }

    /// All bump amplitudes strictly positive: the profile has no interior
    /// zeros, where |u|^{2q} loses smoothness for q < 1.5.
    pub fn random_positive(rng: &mut impl Rng, radius: f64, bumps: usize, amplitude: f64) -> Self {
        let list = (0..bumps)
            .map(|_| {
                (
                    rng.gen_range(0.1 * amplitude..amplitude),
                    rng.gen_range(0.0..0.6 * radius),
                    rng.gen_range(0.3..2.0),
                )
            })
            .collect();
        BumpProfile { bumps: list }
    }

    pub fn value(&self, r: f64) -> f64 {
        self.bumps
            .iter()
            .map(|&(a, c, k)| a * (-k * (r - c) * (r - c)).exp())
            .sum()
    }

    pub fn sample(&self, grid: &Arc<RadialGrid>) -> RadialField {
        RadialField::from_fn(grid.clone(), |r| self.value(r))
    }
}

/// d random piecewise-linear components on a shared grid.
pub fn random_field_vector(grid: &Arc<RadialGrid>, d: usize, rng: &mut impl Rng) -> FieldVector {
    let components = (0..d)
        .map(|_| PiecewiseProfile::random(rng, grid.radius(), 12, 2.0).sample(grid))
        .collect();
    FieldVector::new(components).expect("components share the grid")
}

/// d random smooth bump-sum components on a shared grid.
pub fn random_smooth_vector(grid: &Arc<RadialGrid>, d: usize, rng: &mut impl Rng) -> FieldVector {
    let components = (0..d)
        .map(|_| BumpProfile::random(rng, grid.radius(), 4, 1.5).sample(grid))
        .collect();
    FieldVector::new(components).expect("components share the grid")
}

/// d strictly positive smooth components on a shared grid.
pub fn random_positive_vector(grid: &Arc<RadialGrid>, d: usize, rng: &mut impl Rng) -> FieldVector {
    let components = (0..d)
        .map(|_| BumpProfile::random_positive(rng, grid.radius(), 4, 1.5).sample(grid))
        .collect();
    FieldVector::new(components).expect("components share the grid")
}
