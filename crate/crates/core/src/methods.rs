//! Iterative feasibility methods over a family of convex sets.
//!
//! Two cut-based methods form the core: the exact variant projects onto
//! every set, collects the supporting half-spaces of those projections,
//! and projects onto their intersection; the inexact variant replaces
//! both phases with their cheap one-cut counterparts. Classical
//! competitors (cyclic projections, averaged projections, and two
//! circumcenter schemes) run under the same driver and stopping rule so
//! traces are comparable across methods.
//!
//! Parallel method variants compute per-set projections concurrently and
//! always combine results in set-index order, so parallel and sequential
//! runs produce bitwise-identical iterate sequences.

use std::time::Instant;

use rayon::prelude::*;

use crate::circumcenter::circumcenter_with_base;
use crate::error::CoreError;
use crate::linalg::Vector;
use crate::poly::Polyhedron;
use crate::sets::{supporting_halfspace, ConvexSet};

/// Inner tolerance for the exact projection subproblems. Chosen so
/// projection error stays far below every method-level tolerance while
/// leaving headroom above linear-solve noise.
pub const PROJ_TOL: f64 = 1e-10;

#[derive(Clone, Copy, Debug, PartialEq, Eq, Hash)]
pub enum Method {
    /// Exact cut-based method, sequential projection phase.
    Tpm,
    /// Exact cut-based method, parallel projection phase.
    TpmPar,
    /// Inexact variant: one-step approximate projections and a single
    /// max-cut step.
    A3pm,
    A3pmPar,
    /// Cyclic exact projections in set order.
    Cyclic,
    /// Average of the exact projections.
    Cimmino,
    CimminoPar,
    /// Successive circumcentered-reflection scheme over set pairs.
    Sccrm,
    /// Circumcentered reflections in the product space.
    CrmProd,
}

impl Method {
    pub const ALL: [Method; 9] = [
        Method::Tpm,
        Method::TpmPar,
        Method::A3pm,
        Method::A3pmPar,
        Method::Cyclic,
        Method::Cimmino,
        Method::CimminoPar,
        Method::Sccrm,
        Method::CrmProd,
    ];

    pub fn name(&self) -> &'static str {
        match self {
            Method::Tpm => "3pm",
            Method::TpmPar => "3pm-par",
            Method::A3pm => "a3pm",
            Method::A3pmPar => "a3pm-par",
            Method::Cyclic => "cyclic",
            Method::Cimmino => "cimmino",
            Method::CimminoPar => "cimmino-par",
            Method::Sccrm => "sccrm",
            Method::CrmProd => "crm-prod",
        }
    }

    pub fn parse(s: &str) -> Option<Method> {
        let lower = s.to_ascii_lowercase();
        Method::ALL.iter().copied().find(|m| m.name() == lower)
    }

    fn parallel(&self) -> bool {
        matches!(self, Method::TpmPar | Method::A3pmPar | Method::CimminoPar)
    }
}

/// Accuracy schedule for the inexact method: the per-iteration accuracy
/// parameter eps_k in [0, 1). A value of exactly 0 switches that
/// iteration to the exact method.
#[derive(Clone, Copy, Debug, PartialEq)]
pub enum AccuracySchedule {
    Constant(f64),
    /// eps_k = initial * ratio^k.
    Geometric { initial: f64, ratio: f64 },
}

impl AccuracySchedule {
    pub fn value(&self, k: usize) -> f64 {
        match *self {
            AccuracySchedule::Constant(e) => e,
            AccuracySchedule::Geometric { initial, ratio } => initial * ratio.powi(k as i32),
        }
    }

    pub fn supremum(&self) -> f64 {
        match *self {
            AccuracySchedule::Constant(e) => e,
            AccuracySchedule::Geometric { initial, ratio } => {
                if ratio <= 1.0 {
                    initial
                } else {
                    f64::INFINITY
                }
            }
        }
    }
}

/// Order in which per-set results are combined. Index order is the only
/// supported reduction: it is what makes parallel and sequential runs
/// bitwise identical.
#[derive(Clone, Copy, Debug, Default, PartialEq, Eq)]
pub enum ReductionOrder {
    #[default]
    IndexOrder,
}

#[derive(Clone, Copy, Debug, PartialEq)]
pub struct SolverConfig {
    pub method: Method,
    /// Stopping slack: the run stops once every set accepts the iterate
    /// with this slack.
    pub eps_stop: f64,
    pub accuracy: AccuracySchedule,
    pub max_iters: usize,
    pub max_wall_seconds: f64,
    pub reduction: ReductionOrder,
}

impl SolverConfig {
    pub fn new(method: Method) -> Self {
        SolverConfig {
            method,
            eps_stop: 1e-8,
            accuracy: AccuracySchedule::Constant(0.5),
            max_iters: 100_000,
            max_wall_seconds: 600.0,
            reduction: ReductionOrder::IndexOrder,
        }
    }

    pub fn validate(&self) -> Result<(), CoreError> {
        if !(self.eps_stop >= 0.0) || !self.eps_stop.is_finite() {
            return Err(CoreError::InvalidConfig(format!(
                "eps_stop must be finite and >= 0, got {}",
                self.eps_stop
            )));
        }
        let sup = self.accuracy.supremum();
        if !(sup < 1.0) || sup < 0.0 {
            return Err(CoreError::InvalidConfig(format!(
                "accuracy schedule must stay within [0, 1); supremum is {sup}"
            )));
        }
        if !(self.max_wall_seconds > 0.0) {
            return Err(CoreError::InvalidConfig(format!(
                "max_wall_seconds must be positive, got {}",
                self.max_wall_seconds
            )));
        }
        Ok(())
    }
}

#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub enum Termination {
    EpsSolution,
    IterCap,
    TimeCap,
}

impl Termination {
    pub fn as_str(&self) -> &'static str {
        match self {
            Termination::EpsSolution => "EPS_SOLUTION",
            Termination::IterCap => "ITER_CAP",
            Termination::TimeCap => "TIME_CAP",
        }
    }
}

/// Per-iteration diagnostics. `violation` and `max_set_distance` are
/// measured at the iterate the step produced; `violation` uses the
/// config's stopping slack.
#[derive(Clone, Copy, Debug)]
pub struct IterRecord {
    pub violation: f64,
    pub max_set_distance: f64,
    pub step_seconds: f64,
    pub active_cut_count: usize,
}

#[derive(Clone, Debug)]
pub struct Trace {
    /// x_0, x_1, ..., x_K; always one longer than `per_iter`.
    pub iterates: Vec<Vector>,
    pub per_iter: Vec<IterRecord>,
    pub termination: Termination,
}

impl Trace {
    pub fn iterations(&self) -> usize {
        self.per_iter.len()
    }

    pub fn final_iterate(&self) -> &Vector {
        self.iterates.last().expect("trace holds at least x0")
    }

    pub fn final_violation(&self) -> Option<f64> {
        self.per_iter.last().map(|r| r.violation)
    }
}

/// Diagnostics from one cut-based step.
#[derive(Clone, Copy, Debug)]
pub struct StepDiag {
    /// The iterate was inside every set, so no cut was produced and the
    /// step is the identity.
    pub all_feasible: bool,
    pub active_cut_count: usize,
}

impl StepDiag {
    fn plain() -> Self {
        StepDiag {
            all_feasible: false,
            active_cut_count: 0,
        }
    }
}

/// Largest membership residual of `y` over the family, with slack `eps`.
/// Nonpositive exactly when `y` is an eps-approximate solution.
pub fn violation<S: ConvexSet>(sets: &[S], y: &Vector, eps: f64) -> f64 {
    assert!(!sets.is_empty(), "violation of an empty family");
    sets.iter()
        .map(|s| s.violation(y, eps))
        .fold(f64::NEG_INFINITY, f64::max)
}

pub fn is_eps_solution<S: ConvexSet>(sets: &[S], y: &Vector, eps: f64) -> bool {
    violation(sets, y, eps) <= 0.0
}

/// Exact distance from `x` to the farthest set.
pub fn max_set_distance<S: ConvexSet>(
    sets: &[S],
    x: &Vector,
    tol: f64,
) -> Result<f64, CoreError> {
    let mut worst = 0.0_f64;
    for s in sets {
        let p = s.project(x, tol)?;
        worst = worst.max(x.dist(&p));
    }
    Ok(worst)
}

fn project_each<S: ConvexSet + Sync>(
    sets: &[S],
    x: &Vector,
    tol: f64,
    parallel: bool,
    approximate: bool,
) -> Result<Vec<Vector>, CoreError> {
    let project_one = |s: &S| {
        if approximate {
            s.approx_project(x)
        } else {
            s.project(x, tol)
        }
    };
    if parallel {
        // Collection preserves set-index order, so the reduction that
        // follows is identical to the sequential path.
        sets.par_iter().map(project_one).collect()
    } else {
        sets.iter().map(project_one).collect()
    }
}

/// One step of the exact cut-based method: project onto every set, build
/// the supporting half-spaces at the projections, and project onto their
/// intersection. Returns the identity (flagged in the diagnostics) when
/// the iterate is already in every set.
pub fn step_3pm<S: ConvexSet + Sync>(
    sets: &[S],
    x: &Vector,
    tol: f64,
    parallel: bool,
) -> Result<(Vector, StepDiag), CoreError> {
    let projections = project_each(sets, x, tol, parallel, false)?;
    let cuts: Vec<_> = projections
        .iter()
        .filter_map(|p| supporting_halfspace(x, p))
        .collect();
    if cuts.is_empty() {
        return Ok((
            x.clone(),
            StepDiag {
                all_feasible: true,
                active_cut_count: 0,
            },
        ));
    }
    let poly = Polyhedron::new(cuts);
    let proj = poly.project(x, tol)?;
    let active = proj.active.len();
    Ok((
        proj.point,
        StepDiag {
            all_feasible: false,
            active_cut_count: active,
        },
    ))
}

/// One step of the inexact variant: approximate projections onto every
/// set, then a single subgradient step on the worst cut. `eps_k` = 0
/// delegates to the exact step, reproducing it bitwise.
pub fn step_a3pm<S: ConvexSet + Sync>(
    sets: &[S],
    x: &Vector,
    eps_k: f64,
    tol: f64,
    parallel: bool,
) -> Result<(Vector, StepDiag), CoreError> {
    debug_assert!((0.0..1.0).contains(&eps_k));
    if eps_k == 0.0 {
        return step_3pm(sets, x, tol, parallel);
    }
    let projections = project_each(sets, x, tol, parallel, true)?;
    let cuts: Vec<_> = projections
        .iter()
        .filter_map(|p| supporting_halfspace(x, p))
        .collect();
    if cuts.is_empty() {
        return Ok((
            x.clone(),
            StepDiag {
                all_feasible: true,
                active_cut_count: 0,
            },
        ));
    }
    let poly = Polyhedron::new(cuts);
    let next = poly.max_cut_step(x);
    Ok((
        next,
        StepDiag {
            all_feasible: false,
            active_cut_count: 1,
        },
    ))
}

/// One sweep of cyclic projections: x -> P_m(...(P_2(P_1(x)))).
pub fn step_cyclic<S: ConvexSet>(sets: &[S], x: &Vector, tol: f64) -> Result<Vector, CoreError> {
    let mut y = x.clone();
    for s in sets {
        y = s.project(&y, tol)?;
    }
    Ok(y)
}

/// Averaged projections: the mean of the per-set projections, summed in
/// set-index order.
pub fn step_cimmino<S: ConvexSet + Sync>(
    sets: &[S],
    x: &Vector,
    tol: f64,
    parallel: bool,
) -> Result<Vector, CoreError> {
    let projections = project_each(sets, x, tol, parallel, false)?;
    let mut sum = Vector::zeros(x.dim());
    for p in &projections {
        sum.axpy(1.0, p);
    }
    Ok(sum.scale(1.0 / sets.len() as f64))
}

/// Pair schedule for the successive circumcenter scheme: at iteration k
/// (1-based) the pair is (left, right) = (k-1 mod m, k mod m) in 0-based
/// set indices, so the pair walks the family with a one-set offset and
/// left == right only when m == 1.
#[derive(Clone, Copy, Debug)]
pub struct SccrmState {
    k: usize,
}

impl SccrmState {
    pub fn new() -> Self {
        SccrmState { k: 1 }
    }

    pub fn iteration(&self) -> usize {
        self.k
    }

    pub fn pair(&self, m: usize) -> (usize, usize) {
        assert!(m >= 1);
        ((self.k - 1) % m, self.k % m)
    }

    pub fn advance(&mut self) {
        self.k += 1;
    }
}

impl Default for SccrmState {
    fn default() -> Self {
        SccrmState::new()
    }
}

/// One step of the successive circumcenter scheme on the current pair
/// (A, B) = (sets[right], sets[left]):
/// w = (P_A + P_B)/2 applied to P_A(P_B(x)), then the circumcenter of
/// (w, R_A(w), R_B(w)). Advances the pair state.
pub fn step_sccrm<S: ConvexSet>(
    sets: &[S],
    state: &mut SccrmState,
    x: &Vector,
    tol: f64,
) -> Result<Vector, CoreError> {
    let (left, right) = state.pair(sets.len());
    let a = &sets[right];
    let b = &sets[left];
    let z = a.project(&b.project(x, tol)?, tol)?;
    let w = (&a.project(&z, tol)? + &b.project(&z, tol)?).scale(0.5);
    let ra = a.reflect(&w, tol)?;
    let rb = b.reflect(&w, tol)?;
    let next = circumcenter_with_base(&w, &[&ra, &rb]);
    state.advance();
    Ok(next)
}

fn replicate_blocks(x: &Vector, m: usize) -> Vector {
    let n = x.dim();
    let mut out = Vec::with_capacity(n * m);
    for _ in 0..m {
        out.extend_from_slice(x.as_slice());
    }
    Vector::from_slice(&out)
}

fn block_average(z: &Vector, n: usize, m: usize) -> Vector {
    assert_eq!(z.dim(), n * m);
    let mut avg = vec![0.0; n];
    for b in 0..m {
        for i in 0..n {
            avg[i] += z[b * n + i];
        }
    }
    Vector::from_slice(&avg).scale(1.0 / m as f64)
}

/// One product-space circumcenter step. The state vector stacks one
/// n-block per set; the step is the circumcenter of (z, R_W(z),
/// R_D(R_W(z))) where W is the set product (blockwise projections) and D
/// the diagonal (block averaging).
pub fn step_crm_product<S: ConvexSet>(
    sets: &[S],
    z: &Vector,
    tol: f64,
) -> Result<Vector, CoreError> {
    let m = sets.len();
    let n = sets[0].dim();
    assert_eq!(z.dim(), n * m, "product iterate has one block per set");

    // R_W(z): blockwise reflections
    let mut rw = Vec::with_capacity(n * m);
    for (b, s) in sets.iter().enumerate() {
        let block = Vector::from_slice(&z.as_slice()[b * n..(b + 1) * n]);
        let r = s.reflect(&block, tol)?;
        rw.extend_from_slice(r.as_slice());
    }
    let rw = Vector::from_slice(&rw);

    // R_D(R_W(z)): reflection through the diagonal
    let pd = replicate_blocks(&block_average(&rw, n, m), m);
    let rd = &pd.scale(2.0) - &rw;

    Ok(circumcenter_with_base(z, &[&rw, &rd]))
}

/// Runs `method` from `x0` until the iterate is an eps-approximate
/// solution or a cap trips. The returned trace records every iterate and
/// per-step diagnostics; wall-time entries are the only
/// non-deterministic fields.
pub fn run<S: ConvexSet + Sync>(
    sets: &[S],
    x0: &Vector,
    cfg: &SolverConfig,
) -> Result<Trace, CoreError> {
    cfg.validate()?;
    if sets.is_empty() {
        return Err(CoreError::InvalidConfig("no sets to solve over".into()));
    }
    let n = sets[0].dim();
    if sets.iter().any(|s| s.dim() != n) || x0.dim() != n {
        return Err(CoreError::DimensionMismatch {
            expected: n,
            got: x0.dim(),
        });
    }

    let start = Instant::now();
    let mut iterates = vec![x0.clone()];
    let mut per_iter: Vec<IterRecord> = Vec::new();
    let mut sccrm_state = SccrmState::new();
    let mut crm_z = match cfg.method {
        Method::CrmProd => Some(replicate_blocks(x0, sets.len())),
        _ => None,
    };

    let termination = loop {
        let x = iterates.last().expect("nonempty");
        if is_eps_solution(sets, x, cfg.eps_stop) {
            break Termination::EpsSolution;
        }
        let k = per_iter.len();
        if k >= cfg.max_iters {
            break Termination::IterCap;
        }
        if start.elapsed().as_secs_f64() >= cfg.max_wall_seconds {
            break Termination::TimeCap;
        }

        let step_start = Instant::now();
        let (next, diag) = match cfg.method {
            Method::Tpm | Method::TpmPar => step_3pm(sets, x, PROJ_TOL, cfg.method.parallel())?,
            Method::A3pm | Method::A3pmPar => {
                let eps_k = cfg.accuracy.value(k);
                step_a3pm(sets, x, eps_k, PROJ_TOL, cfg.method.parallel())?
            }
            Method::Cyclic => (step_cyclic(sets, x, PROJ_TOL)?, StepDiag::plain()),
            Method::Cimmino | Method::CimminoPar => (
                step_cimmino(sets, x, PROJ_TOL, cfg.method.parallel())?,
                StepDiag::plain(),
            ),
            Method::Sccrm => (
                step_sccrm(sets, &mut sccrm_state, x, PROJ_TOL)?,
                StepDiag::plain(),
            ),
            Method::CrmProd => {
                let z = crm_z.as_mut().expect("product state initialized");
                *z = step_crm_product(sets, z, PROJ_TOL)?;
                (block_average(z, n, sets.len()), StepDiag::plain())
            }
        };
        let step_seconds = step_start.elapsed().as_secs_f64();

        per_iter.push(IterRecord {
            violation: violation(sets, &next, cfg.eps_stop),
            max_set_distance: max_set_distance(sets, &next, PROJ_TOL)?,
            step_seconds,
            active_cut_count: diag.active_cut_count,
        });
        iterates.push(next);
    };

    Ok(Trace {
        iterates,
        per_iter,
        termination,
    })
}
