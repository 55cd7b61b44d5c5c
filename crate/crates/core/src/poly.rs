//! Projection onto an intersection of half-spaces.
//!
//! `project` solves min ||y - x|| s.t. <a_i, y> <= b_i. Hildreth dual
//! coordinate ascent (Dykstra specialized to half-spaces, so it converges
//! to the exact projection on any consistent system) is the workhorse;
//! after each block of sweeps an active-set candidate is solved from the
//! current multiplier support and returned only if it passes a full KKT
//! check. The accelerator never adds cuts on its own, so it cannot cycle;
//! failed attempts just mean more sweeps. `max_cut_step` is the cheap
//! single-cut alternative used by the inexact method: one subgradient
//! step on the worst cut.

use crate::error::CoreError;
use crate::linalg::{solve_symmetric, Vector};
use crate::sets::HalfSpace;

/// Total Hildreth sweep budget.
const MAX_SWEEPS: usize = 10_000;

/// Sweeps between active-set acceleration attempts.
const STAGE_SWEEPS: usize = 50;

/// Relative displacement beyond which the dual iteration is declared
/// divergent (the cut system then has no common point).
const DIVERGENCE_FACTOR: f64 = 1e12;

/// Finite intersection of half-spaces. An empty cut list is all of space.
#[derive(Clone, Debug)]
pub struct Polyhedron {
    cuts: Vec<HalfSpace>,
}

/// Result of an exact polyhedral projection: the point, one Lagrange
/// multiplier per cut, and the indices active at the solution
/// (positive multiplier or boundary within tolerance).
#[derive(Clone, Debug)]
pub struct PolyProjection {
    pub point: Vector,
    pub multipliers: Vec<f64>,
    pub active: Vec<usize>,
}

impl Polyhedron {
    pub fn new(cuts: Vec<HalfSpace>) -> Self {
        if let Some(first) = cuts.first() {
            assert!(
                cuts.iter().all(|c| c.dim() == first.dim()),
                "all cuts must share one dimension"
            );
        }
        Polyhedron { cuts }
    }

    pub fn cuts(&self) -> &[HalfSpace] {
        &self.cuts
    }

    pub fn len(&self) -> usize {
        self.cuts.len()
    }

    pub fn is_empty(&self) -> bool {
        self.cuts.is_empty()
    }

    /// Exact projection of `x`. Feasibility of the result holds to
    /// tol * (1 + ||x||) in distance units, multipliers are nonnegative,
    /// and complementary slackness holds to the same scale.
    pub fn project(&self, x: &Vector, tol: f64) -> Result<PolyProjection, CoreError> {
        let m = self.cuts.len();
        if m == 0 {
            return Ok(PolyProjection {
                point: x.clone(),
                multipliers: Vec::new(),
                active: Vec::new(),
            });
        }
        let scale = 1.0 + x.norm();
        let feas_tol = tol * scale;
        let norms_sq: Vec<f64> = self.cuts.iter().map(|c| c.normal().norm_sq()).collect();
        let norms: Vec<f64> = norms_sq.iter().map(|v| v.sqrt()).collect();

        let mut lambda = vec![0.0; m];
        let mut y = x.clone();
        let mut sweeps = 0usize;

        loop {
            let mut converged = false;
            for _ in 0..STAGE_SWEEPS {
                sweeps += 1;
                // moved bounds how far this sweep displaced the iterate;
                // a sweep that moves nothing is a dual fixed point, and
                // only there do feasibility, nonnegativity, and
                // complementary slackness all hold at once. Feasibility
                // alone is reached much earlier and does not make the
                // point optimal.
                let mut moved = 0.0_f64;
                for i in 0..m {
                    let excess = self.cuts[i].excess(&y);
                    let updated = (lambda[i] + excess / norms_sq[i]).max(0.0);
                    let delta = updated - lambda[i];
                    if delta != 0.0 {
                        y.axpy(-delta, self.cuts[i].normal());
                        lambda[i] = updated;
                        moved += delta.abs() * norms[i];
                    }
                }
                if y.dist(x) > DIVERGENCE_FACTOR * scale {
                    return Err(CoreError::EmptyPolyhedronSuspected);
                }
                let worst = (0..m)
                    .map(|i| self.cuts[i].excess(&y) / norms[i])
                    .fold(f64::NEG_INFINITY, f64::max);
                if worst <= 0.1 * feas_tol && moved <= 0.1 * feas_tol {
                    converged = true;
                    break;
                }
            }

            // Acceleration attempt: equality solve on working sets read
            // off the dual iterate, kept only when the KKT check passes.
            let support: Vec<usize> = (0..m).filter(|&i| lambda[i] > 0.0).collect();
            let near: Vec<usize> = (0..m)
                .filter(|&i| {
                    lambda[i] > 0.0 || self.cuts[i].excess(&y) / norms[i] >= -10.0 * feas_tol
                })
                .collect();
            let second = if near == support { None } else { Some(near) };
            for working in std::iter::once(support).chain(second) {
                if let Some(done) = self.try_working_set(x, working, &norms, feas_tol) {
                    return Ok(done);
                }
            }

            if converged {
                // Certification failed on a degenerate working set, but
                // the dual iterate sits at its fixed point within
                // tolerance and carries exact stationarity
                // (y = x - sum lambda_i a_i by construction), so it is
                // the honest answer.
                let active: Vec<usize> = (0..m)
                    .filter(|&i| {
                        lambda[i] > 0.0 || self.cuts[i].excess(&y).abs() / norms[i] <= feas_tol
                    })
                    .collect();
                return Ok(PolyProjection {
                    point: y,
                    multipliers: lambda,
                    active,
                });
            }
            if sweeps >= MAX_SWEEPS {
                return Err(CoreError::NonConvergence {
                    op: "polyhedral projection",
                    iterations: sweeps,
                });
            }
        }
    }

    /// Equality-constrained projection onto the cuts in `working`,
    /// dropping negative multipliers until none remain, then a full KKT
    /// verification. Returns None if the verified candidate never
    /// materializes; the working set only shrinks, so this terminates.
    fn try_working_set(
        &self,
        x: &Vector,
        mut working: Vec<usize>,
        norms: &[f64],
        feas_tol: f64,
    ) -> Option<PolyProjection> {
        let m = self.cuts.len();
        let (cand, nu) = loop {
            let k = working.len();
            let mut nu = vec![0.0; k];
            if k > 0 {
                let mut gram = vec![0.0; k * k];
                for s in 0..k {
                    for t in s..k {
                        let g = self.cuts[working[s]]
                            .normal()
                            .dot(self.cuts[working[t]].normal());
                        gram[s * k + t] = g;
                        gram[t * k + s] = g;
                    }
                }
                let rhs: Vec<f64> = working.iter().map(|&i| self.cuts[i].excess(x)).collect();
                nu = solve_symmetric(k, &gram, &rhs);
            }

            let nu_scale = nu.iter().fold(1.0_f64, |a, &b| a.max(b.abs()));
            let worst = nu
                .iter()
                .enumerate()
                .min_by(|a, b| a.1.partial_cmp(b.1).unwrap());
            match worst {
                Some((t, &v)) if v < -1e-12 * nu_scale => {
                    working.remove(t);
                }
                _ => {
                    let mut cand = x.clone();
                    for t in 0..k {
                        cand.axpy(-nu[t], self.cuts[working[t]].normal());
                    }
                    break (cand, nu);
                }
            }
        };

        // KKT: every cut feasible, working cuts on their boundaries,
        // both in distance units.
        for (i, c) in self.cuts.iter().enumerate() {
            if c.excess(&cand) / norms[i] > feas_tol {
                return None;
            }
        }
        for &i in &working {
            if self.cuts[i].excess(&cand).abs() / norms[i] > feas_tol {
                return None;
            }
        }

        let mut multipliers = vec![0.0; m];
        for (t, &i) in working.iter().enumerate() {
            multipliers[i] = nu[t].max(0.0);
        }
        let active: Vec<usize> = (0..m)
            .filter(|&i| {
                multipliers[i] > 0.0 || self.cuts[i].excess(&cand).abs() / norms[i] <= feas_tol
            })
            .collect();
        Some(PolyProjection {
            point: cand,
            multipliers,
            active,
        })
    }

    /// Single subgradient step on h(x) = max_i (<a_i, x> - b_i): identity
    /// when h(x) <= 0, otherwise `x - h(x)/||a_i*||^2 a_i*` for the
    /// lowest maximizing index i*.
    pub fn max_cut_step(&self, x: &Vector) -> Vector {
        if self.cuts.is_empty() {
            return x.clone();
        }
        let mut best = 0usize;
        let mut h = self.cuts[0].excess(x);
        for (i, c) in self.cuts.iter().enumerate().skip(1) {
            let e = c.excess(x);
            if e > h {
                h = e;
                best = i;
            }
        }
        if h <= 0.0 {
            return x.clone();
        }
        let normal = self.cuts[best].normal();
        let mut y = x.clone();
        y.axpy(-h / normal.norm_sq(), normal);
        y
    }
}
