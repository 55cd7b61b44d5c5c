//! Constraint sets and their projections.
//!
//! An [`Ellipsoid`] `{ y : (y-c)^T Q (y-c) <= r^2 }` carries two
//! projectors: an exact one (KKT multiplier root-finding) and a cheap
//! approximate one (single subgradient cut on the gauge). A
//! [`HalfSpace`] `{ z : <a, z> <= b }` projects in closed form and doubles
//! as the separating-cut building block for the polyhedral phase.

use crate::error::CoreError;
use crate::linalg::{SpdMatrix, Vector};

/// Points closer to the pre-projection point than this (relative) are
/// treated as already inside, making the supporting cut trivial.
const TRIVIAL_CUT_REL_TOL: f64 = 1e-14;

/// Iteration cap for the scalar KKT root-find.
const PROJECT_MAX_ITERS: usize = 200;

/// Common interface the iterative methods run against. `violation`
/// must be <= 0 exactly when `y` is an eps-relaxed member of the set.
pub trait ConvexSet {
    fn dim(&self) -> usize;

    /// Membership residual with slack `eps` (>= 0); nonpositive iff `y`
    /// is accepted as an eps-approximate member.
    fn violation(&self, y: &Vector, eps: f64) -> f64;

    fn contains(&self, y: &Vector) -> bool {
        self.violation(y, 0.0) <= 0.0
    }

    /// Exact projection onto the set, to tolerance `tol` where the
    /// projection is iterative.
    fn project(&self, x: &Vector, tol: f64) -> Result<Vector, CoreError>;

    /// Approximate projection: cheaper than `project`, exact for sets
    /// whose projection is closed-form. The result `p` always satisfies
    /// the separation property: the set lies in
    /// `{ z : <z - p, x - p> <= 0 }`.
    fn approx_project(&self, x: &Vector) -> Result<Vector, CoreError>;

    /// Reflection through the set: `2 P(x) - x`.
    fn reflect(&self, x: &Vector, tol: f64) -> Result<Vector, CoreError> {
        let p = self.project(x, tol)?;
        Ok(&p.scale(2.0) - x)
    }
}

/// Gauge value and gradient of an ellipsoid at a point.
#[derive(Clone, Debug)]
pub struct GaugeValue {
    pub value: f64,
    pub gradient: Vector,
}

/// `{ y : (y - center)^T shape (y - center) <= radius^2 }` with `shape`
/// symmetric positive definite and `radius > 0`.
#[derive(Clone, Debug)]
pub struct Ellipsoid {
    center: Vector,
    shape: SpdMatrix,
    radius: f64,
}

impl Ellipsoid {
    pub fn new(center: Vector, shape: SpdMatrix, radius: f64) -> Result<Self, CoreError> {
        if shape.dim() != center.dim() {
            return Err(CoreError::DimensionMismatch {
                expected: center.dim(),
                got: shape.dim(),
            });
        }
        if !(radius > 0.0) || !radius.is_finite() {
            return Err(CoreError::InvalidInstance(format!(
                "ellipsoid radius must be positive and finite, got {radius}"
            )));
        }
        // Certify positive definiteness up front; the factor is cached
        // for the projection solves.
        shape.factorization()?;
        Ok(Ellipsoid {
            center,
            shape,
            radius,
        })
    }

    pub fn center(&self) -> &Vector {
        &self.center
    }

    pub fn shape(&self) -> &SpdMatrix {
        &self.shape
    }

    pub fn radius(&self) -> f64 {
        self.radius
    }

    pub fn dim(&self) -> usize {
        self.center.dim()
    }

    fn quadratic(&self, y: &Vector) -> f64 {
        let d = y - &self.center;
        self.shape.matvec(&d).dot(&d)
    }

    /// Gauge g(y) = (y-c)^T Q (y-c) - r^2 and its gradient 2 Q (y-c).
    /// The set is exactly { g <= 0 }.
    pub fn gauge(&self, y: &Vector) -> Result<GaugeValue, CoreError> {
        if y.dim() != self.dim() {
            return Err(CoreError::DimensionMismatch {
                expected: self.dim(),
                got: y.dim(),
            });
        }
        let d = y - &self.center;
        let qd = self.shape.matvec(&d);
        Ok(GaugeValue {
            value: qd.dot(&d) - self.radius * self.radius,
            gradient: qd.scale(2.0),
        })
    }

    /// Exact Euclidean projection. Membership is tested with no slack:
    /// points with gauge <= 0 are returned unchanged.
    ///
    /// For exterior points the KKT conditions reduce to a scalar root
    /// `g(p(mu)) = 0` with `p(mu) = (I + mu Q)^{-1} (x + mu Q c)`, solved
    /// by safeguarded Newton on a doubling bracket. The returned point
    /// satisfies |g(p)| <= tol * r^2.
    pub fn exact_project(&self, x: &Vector, tol: f64) -> Result<Vector, CoreError> {
        if x.dim() != self.dim() {
            return Err(CoreError::DimensionMismatch {
                expected: self.dim(),
                got: x.dim(),
            });
        }
        let r_sq = self.radius * self.radius;
        let g0 = self.quadratic(x) - r_sq;
        if g0 <= 0.0 {
            return Ok(x.clone());
        }
        let d = x - &self.center;
        let n = self.dim();

        // g(p(mu)) and its derivative; p(mu) - c = (I + mu Q)^{-1} (x - c).
        // The shared evaluation budget doubles as the convergence cap.
        let mut evals = 0usize;
        let mut eval = |mu: f64| -> Result<(f64, f64, Vector), CoreError> {
            evals += 1;
            if evals > PROJECT_MAX_ITERS {
                return Err(CoreError::NonConvergence {
                    op: "ellipsoid projection",
                    iterations: PROJECT_MAX_ITERS,
                });
            }
            let shifted = SpdMatrix::from_fn(n, |i, j| {
                let q = self.shape.get(i, j);
                if i == j {
                    1.0 + mu * q
                } else {
                    mu * q
                }
            });
            let f = shifted.factorization()?;
            let rvec = f.solve(&d)?;
            let w = self.shape.matvec(&rvec);
            let val = rvec.dot(&w) - r_sq;
            let s = f.solve(&w)?;
            let deriv = -2.0 * w.dot(&s);
            Ok((val, deriv, rvec))
        };

        // bracket [lo, hi] with g(p(lo)) > 0 > g(p(hi))
        let mut lo = 0.0;
        let mut hi = 1.0;
        let (mut val_hi, _, _) = eval(hi)?;
        while val_hi >= 0.0 {
            lo = hi;
            hi *= 2.0;
            let e = eval(hi)?;
            val_hi = e.0;
        }

        let mut mu = 0.5 * (lo + hi);
        loop {
            let (val, deriv, rvec) = eval(mu)?;
            if val.abs() <= tol * r_sq {
                return Ok(&self.center + &rvec);
            }
            if val > 0.0 {
                lo = mu;
            } else {
                hi = mu;
            }
            let newton = mu - val / deriv;
            mu = if newton > lo && newton < hi {
                newton
            } else {
                0.5 * (lo + hi)
            };
        }
    }

    /// One-step approximate projection: identity inside the set,
    /// otherwise a single subgradient cut on the gauge,
    /// `x - g(x)/||g'(x)||^2 * g'(x)`.
    pub fn fukushima_project(&self, x: &Vector) -> Result<Vector, CoreError> {
        let g = self.gauge(x)?;
        if g.value <= 0.0 {
            return Ok(x.clone());
        }
        let grad_sq = g.gradient.norm_sq();
        let mut p = x.clone();
        p.axpy(-g.value / grad_sq, &g.gradient);
        Ok(p)
    }

    /// Reflection through the exact projection.
    pub fn reflect(&self, x: &Vector, tol: f64) -> Result<Vector, CoreError> {
        let p = self.exact_project(x, tol)?;
        Ok(&p.scale(2.0) - x)
    }
}

impl ConvexSet for Ellipsoid {
    fn dim(&self) -> usize {
        self.dim()
    }

    /// (y-c)^T Q (y-c) - (r + eps)^2.
    fn violation(&self, y: &Vector, eps: f64) -> f64 {
        let slack = self.radius + eps;
        self.quadratic(y) - slack * slack
    }

    fn project(&self, x: &Vector, tol: f64) -> Result<Vector, CoreError> {
        self.exact_project(x, tol)
    }

    fn approx_project(&self, x: &Vector) -> Result<Vector, CoreError> {
        self.fukushima_project(x)
    }

    fn reflect(&self, x: &Vector, tol: f64) -> Result<Vector, CoreError> {
        Ellipsoid::reflect(self, x, tol)
    }
}

/// `{ z : <normal, z> <= offset }` with a nonzero normal.
#[derive(Clone, Debug, PartialEq)]
pub struct HalfSpace {
    normal: Vector,
    offset: f64,
}

impl HalfSpace {
    pub fn new(normal: Vector, offset: f64) -> Result<Self, CoreError> {
        if normal.norm_sq() == 0.0 {
            return Err(CoreError::InvalidInstance(
                "half-space normal must be nonzero".into(),
            ));
        }
        if !offset.is_finite() {
            return Err(CoreError::NonFinite { index: 0 });
        }
        Ok(HalfSpace { normal, offset })
    }

    pub fn normal(&self) -> &Vector {
        &self.normal
    }

    pub fn offset(&self) -> f64 {
        self.offset
    }

    pub fn dim(&self) -> usize {
        self.normal.dim()
    }

    /// <normal, x> - offset; positive outside, zero on the boundary.
    pub fn excess(&self, x: &Vector) -> f64 {
        self.normal.dot(x) - self.offset
    }

    /// Closed-form projection: x - max(0, excess)/||a||^2 * a.
    pub fn project_point(&self, x: &Vector) -> Vector {
        let e = self.excess(x);
        if e <= 0.0 {
            return x.clone();
        }
        let mut p = x.clone();
        p.axpy(-e / self.normal.norm_sq(), &self.normal);
        p
    }
}

impl ConvexSet for HalfSpace {
    fn dim(&self) -> usize {
        self.dim()
    }

    /// Excess minus eps scaled by the normal length, so `eps` acts in
    /// distance units like the ellipsoid slack does.
    fn violation(&self, y: &Vector, eps: f64) -> f64 {
        self.excess(y) - eps * self.normal.norm()
    }

    fn project(&self, x: &Vector, _tol: f64) -> Result<Vector, CoreError> {
        Ok(self.project_point(x))
    }

    fn approx_project(&self, x: &Vector) -> Result<Vector, CoreError> {
        Ok(self.project_point(x))
    }
}

/// Supporting half-space at a projection point: given `x` and its
/// (possibly approximate) projection `p`, the set that produced `p` lies
/// inside `{ z : <x - p, z> <= <x - p, p> }`. Returns `None` when
/// `x == p` up to 1e-14 * (1 + ||x||), i.e. the cut is all of space.
pub fn supporting_halfspace(x: &Vector, p: &Vector) -> Option<HalfSpace> {
    let a = x - p;
    if a.norm() <= TRIVIAL_CUT_REL_TOL * (1.0 + x.norm()) {
        return None;
    }
    let offset = a.dot(p);
    Some(HalfSpace { normal: a, offset })
}
