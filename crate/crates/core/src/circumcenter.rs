//! Circumcenter of a finite point set: the point of the affine hull of
//! `{base, others...}` equidistant from all of them. Solved through the
//! Gram system of the difference vectors; affinely dependent
//! configurations fall back to the minimum-norm least-squares solution,
//! so duplicates and collinear reflections degrade gracefully instead of
//! failing.

use crate::error::CoreError;
use crate::linalg::{solve_symmetric, Vector};

/// Points closer to the base than this (relative) are dropped before the
/// Gram system is assembled.
const DUPLICATE_REL_TOL: f64 = 1e-14;

#[derive(Clone, Debug)]
pub struct PointSet {
    base: Vector,
    others: Vec<Vector>,
}

impl PointSet {
    pub fn new(base: Vector, others: Vec<Vector>) -> Result<Self, CoreError> {
        for o in &others {
            if o.dim() != base.dim() {
                return Err(CoreError::DimensionMismatch {
                    expected: base.dim(),
                    got: o.dim(),
                });
            }
        }
        Ok(PointSet { base, others })
    }

    pub fn base(&self) -> &Vector {
        &self.base
    }

    pub fn others(&self) -> &[Vector] {
        &self.others
    }

    /// Circumcenter `c = base + sum_j alpha_j (x_j - base)` where the
    /// alphas solve the Gram system
    /// `sum_j alpha_j <x_j - base, x_i - base> = ||x_i - base||^2 / 2`.
    /// Equidistance to the base then follows for every x_i kept.
    pub fn circumcenter(&self) -> Vector {
        let refs: Vec<&Vector> = self.others.iter().collect();
        circumcenter_with_base(&self.base, &refs)
    }
}

pub(crate) fn circumcenter_with_base(base: &Vector, others: &[&Vector]) -> Vector {
    let dup_tol = DUPLICATE_REL_TOL * (1.0 + base.norm());
    let diffs: Vec<Vector> = others
        .iter()
        .filter(|o| o.dist(base) > dup_tol)
        .map(|o| *o - base)
        .collect();
    if diffs.is_empty() {
        return base.clone();
    }
    let k = diffs.len();
    let mut gram = vec![0.0; k * k];
    for i in 0..k {
        for j in i..k {
            let g = diffs[i].dot(&diffs[j]);
            gram[i * k + j] = g;
            gram[j * k + i] = g;
        }
    }
    let rhs: Vec<f64> = diffs.iter().map(|d| 0.5 * d.norm_sq()).collect();
    let alpha = solve_symmetric(k, &gram, &rhs);
    let mut c = base.clone();
    for (a, d) in alpha.iter().zip(&diffs) {
        c.axpy(*a, d);
    }
    c
}
