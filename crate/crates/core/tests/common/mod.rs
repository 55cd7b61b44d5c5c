//! Independent oracles for the integration suites. Everything here is
//! deliberately implemented from scratch against plain slices: a Jacobi
//! eigensolver, Gaussian elimination, a projected-gradient ellipsoid
//! projector, and an active-subset enumerator for polyhedral projection.
//! None of it calls the library's numerical paths beyond construction
//! helpers, so agreement between the two sides is meaningful evidence.

#![allow(dead_code)]

use polyproj_core::rng::SplitMix64;

/// Eigendecomposition of a symmetric matrix by cyclic Jacobi rotations.
/// Returns (eigenvalues, eigenvectors) with eigenvector j stored in
/// column j of the row-major matrix.
pub fn jacobi_eigen(n: usize, sym: &[f64]) -> (Vec<f64>, Vec<f64>) {
    assert_eq!(sym.len(), n * n);
    let mut a = sym.to_vec();
    let mut v = vec![0.0; n * n];
    for i in 0..n {
        v[i * n + i] = 1.0;
    }
    let fro: f64 = sym.iter().map(|x| x * x).sum::<f64>().sqrt();
    let tol = 1e-14 * fro.max(1e-300);
    for _ in 0..100 {
        let mut off = 0.0_f64;
        for p in 0..n {
            for q in (p + 1)..n {
                off = off.max(a[p * n + q].abs());
            }
        }
        if off <= tol {
            break;
        }
        for p in 0..n {
            for q in (p + 1)..n {
                let apq = a[p * n + q];
                if apq.abs() <= tol {
                    continue;
                }
                let theta = 0.5 * (2.0 * apq).atan2(a[p * n + p] - a[q * n + q]);
                let (c, s) = (theta.cos(), theta.sin());
                for k in 0..n {
                    let (akp, akq) = (a[k * n + p], a[k * n + q]);
                    a[k * n + p] = c * akp + s * akq;
                    a[k * n + q] = -s * akp + c * akq;
                }
                for k in 0..n {
                    let (apk, aqk) = (a[p * n + k], a[q * n + k]);
                    a[p * n + k] = c * apk + s * aqk;
                    a[q * n + k] = -s * apk + c * aqk;
                }
                for k in 0..n {
                    let (vkp, vkq) = (v[k * n + p], v[k * n + q]);
                    v[k * n + p] = c * vkp + s * vkq;
                    v[k * n + q] = -s * vkp + c * vkq;
                }
            }
        }
    }
    let vals: Vec<f64> = (0..n).map(|i| a[i * n + i]).collect();
    (vals, v)
}

/// Gaussian elimination with partial pivoting; None when the matrix is
/// numerically singular.
pub fn gauss_solve(n: usize, a: &[f64], b: &[f64]) -> Option<Vec<f64>> {
    assert_eq!(a.len(), n * n);
    assert_eq!(b.len(), n);
    let mut m = a.to_vec();
    let mut rhs = b.to_vec();
    let max_abs = a.iter().fold(0.0_f64, |acc, &x| acc.max(x.abs())).max(1e-300);
    let tol = 1e-12 * max_abs;
    for col in 0..n {
        let pivot_row = (col..n)
            .max_by(|&r1, &r2| {
                m[r1 * n + col]
                    .abs()
                    .partial_cmp(&m[r2 * n + col].abs())
                    .unwrap()
            })
            .unwrap();
        if m[pivot_row * n + col].abs() < tol {
            return None;
        }
        if pivot_row != col {
            for k in 0..n {
                m.swap(col * n + k, pivot_row * n + k);
            }
            rhs.swap(col, pivot_row);
        }
        for row in (col + 1)..n {
            let f = m[row * n + col] / m[col * n + col];
            if f == 0.0 {
                continue;
            }
            for k in col..n {
                m[row * n + k] -= f * m[col * n + k];
            }
            rhs[row] -= f * rhs[col];
        }
    }
    let mut x = vec![0.0; n];
    for row in (0..n).rev() {
        let mut acc = rhs[row];
        for k in (row + 1)..n {
            acc -= m[row * n + k] * x[k];
        }
        x[row] = acc / m[row * n + row];
    }
    Some(x)
}

/// Projection onto {y : (y-c)^T Q (y-c) <= eta^2} by projected gradient
/// descent in the whitened variable u with ||u|| <= 1, step 1/L with
/// L = eta^2 / lambda_min(Q). First-order and iterative, nothing in
/// common with a KKT root-finder.
pub fn pgd_ellipsoid_project(center: &[f64], q: &[f64], eta: f64, x: &[f64]) -> Vec<f64> {
    let n = center.len();
    let (vals, vecs) = jacobi_eigen(n, q);
    let lambda_min = vals.iter().cloned().fold(f64::INFINITY, f64::min);
    assert!(lambda_min > 0.0, "oracle needs a positive definite Q");

    // y = c + eta * R lambda^{-1/2} u  <=>  u = lambda^{1/2} R^T (y-c) / eta
    let to_u = |y: &[f64]| -> Vec<f64> {
        (0..n)
            .map(|j| {
                let mut acc = 0.0;
                for i in 0..n {
                    acc += vecs[i * n + j] * (y[i] - center[i]);
                }
                acc * vals[j].sqrt() / eta
            })
            .collect()
    };
    let to_y = |u: &[f64]| -> Vec<f64> {
        (0..n)
            .map(|i| {
                let mut acc = 0.0;
                for j in 0..n {
                    acc += vecs[i * n + j] * u[j] / vals[j].sqrt();
                }
                center[i] + eta * acc
            })
            .collect()
    };
    let clip = |u: &mut Vec<f64>| {
        let norm: f64 = u.iter().map(|v| v * v).sum::<f64>().sqrt();
        if norm > 1.0 {
            for v in u.iter_mut() {
                *v /= norm;
            }
        }
    };

    let mut u = to_u(x);
    clip(&mut u);
    let step = lambda_min / (eta * eta);
    for _ in 0..500_000 {
        let y = to_y(&u);
        // grad f(u) = eta * (R lambda^{-1/2})^T (y - x)
        let grad: Vec<f64> = (0..n)
            .map(|j| {
                let mut acc = 0.0;
                for i in 0..n {
                    acc += vecs[i * n + j] * (y[i] - x[i]);
                }
                eta * acc / vals[j].sqrt()
            })
            .collect();
        let mut next: Vec<f64> = u.iter().zip(&grad).map(|(a, g)| a - step * g).collect();
        clip(&mut next);
        let delta: f64 = next
            .iter()
            .zip(&u)
            .map(|(a, b)| (a - b) * (a - b))
            .sum::<f64>()
            .sqrt();
        u = next;
        if delta <= 1e-13 {
            break;
        }
    }
    to_y(&u)
}

/// Exact polyhedral projection by enumerating equality-constrained
/// candidates over every subset of cuts and keeping the nearest feasible
/// one. Exponential and only for small m; cuts are (normal, offset).
pub fn enum_poly_project(cuts: &[(Vec<f64>, f64)], x: &[f64]) -> Vec<f64> {
    let m = cuts.len();
    let n = x.len();
    assert!(m <= 16);
    let scale = 1.0 + x.iter().map(|v| v * v).sum::<f64>().sqrt();
    let feasible = |y: &[f64]| {
        cuts.iter().all(|(a, b)| {
            let e: f64 = a.iter().zip(y).map(|(ai, yi)| ai * yi).sum::<f64>() - b;
            e <= 1e-9 * scale
        })
    };

    let mut best: Option<(f64, Vec<f64>)> = None;
    for mask in 0..(1_u32 << m) {
        let subset: Vec<usize> = (0..m).filter(|&i| mask & (1 << i) != 0).collect();
        let k = subset.len();
        if k > n {
            continue;
        }
        let candidate = if k == 0 {
            x.to_vec()
        } else {
            // KKT system: [I A^T; A 0] [y; nu] = [x; b]
            let dim = n + k;
            let mut kkt = vec![0.0; dim * dim];
            let mut rhs = vec![0.0; dim];
            for i in 0..n {
                kkt[i * dim + i] = 1.0;
                rhs[i] = x[i];
            }
            for (t, &ci) in subset.iter().enumerate() {
                let (a, b) = &cuts[ci];
                for i in 0..n {
                    kkt[i * dim + n + t] = a[i];
                    kkt[(n + t) * dim + i] = a[i];
                }
                rhs[n + t] = *b;
            }
            match gauss_solve(dim, &kkt, &rhs) {
                Some(sol) => sol[..n].to_vec(),
                None => continue,
            }
        };
        if !feasible(&candidate) {
            continue;
        }
        let d: f64 = candidate
            .iter()
            .zip(x)
            .map(|(a, b)| (a - b) * (a - b))
            .sum();
        if best.as_ref().map_or(true, |(bd, _)| d < *bd) {
            best = Some((d, candidate));
        }
    }
    best.expect("a feasible subset candidate exists").1
}

pub fn gaussian(rng: &mut SplitMix64, n: usize) -> Vec<f64> {
    let mut out = Vec::with_capacity(n + 1);
    while out.len() < n {
        let u1 = 1.0 - rng.next_f64();
        let u2 = rng.next_f64();
        let r = (-2.0 * u1.ln()).sqrt();
        let t = 2.0 * std::f64::consts::PI * u2;
        out.push(r * t.cos());
        out.push(r * t.sin());
    }
    out.truncate(n);
    out
}

/// Random SPD matrix rows A A^T + lambda I, the same family the library
/// targets, built directly from draws.
pub fn random_spd_rows(rng: &mut SplitMix64, n: usize, lambda: f64) -> Vec<Vec<f64>> {
    let a: Vec<Vec<f64>> = (0..n)
        .map(|_| (0..n).map(|_| rng.uniform(-1.0, 1.0)).collect())
        .collect();
    (0..n)
        .map(|i| {
            (0..n)
                .map(|j| {
                    let dot: f64 = a[i].iter().zip(&a[j]).map(|(x, y)| x * y).sum();
                    if i == j {
                        dot + lambda
                    } else {
                        dot
                    }
                })
                .collect()
        })
        .collect()
}

/// Uniform-ish sample inside {(y-c)^T Q (y-c) <= eta^2}: a unit-ball
/// point in the whitened variable mapped back. Takes the
/// eigendecomposition of Q so callers can amortize it across samples.
pub fn sample_ellipsoid_point(
    rng: &mut SplitMix64,
    center: &[f64],
    eigen: &(Vec<f64>, Vec<f64>),
    eta: f64,
) -> Vec<f64> {
    let n = center.len();
    let (vals, vecs) = eigen;
    let d = gaussian(rng, n);
    let norm: f64 = d.iter().map(|v| v * v).sum::<f64>().sqrt();
    let radius = rng.next_f64().powf(1.0 / n as f64);
    let u: Vec<f64> = d.iter().map(|v| v / norm * radius).collect();
    (0..n)
        .map(|i| {
            let mut acc = 0.0;
            for j in 0..n {
                acc += vecs[i * n + j] * u[j] / vals[j].sqrt();
            }
            center[i] + eta * acc
        })
        .collect()
}

/// Flattens rows for the oracle entry points.
pub fn flatten(rows: &[Vec<f64>]) -> Vec<f64> {
    rows.iter().flat_map(|r| r.iter().copied()).collect()
}

use polyproj_core::linalg::{SpdMatrix, Vector};
use polyproj_core::poly::Polyhedron;
use polyproj_core::sets::{ConvexSet, Ellipsoid, HalfSpace};

fn dist_to(a: &Vector, b: &[f64]) -> f64 {
    a.as_slice()
        .iter()
        .zip(b)
        .map(|(x, y)| (x - y) * (x - y))
        .sum::<f64>()
        .sqrt()
}

/// Worst distance between the library's exact ellipsoid projection and
/// the projected-gradient oracle over `cases` random (set, point)
/// pairs. A third of the queries start inside the set.
pub fn worst_ellipsoid_disagreement(cases: usize, seed: u64) -> f64 {
    let mut rng = SplitMix64::new(seed);
    let mut worst = 0.0_f64;
    for case in 0..cases {
        let n = 2 + (rng.next_u64() % 5) as usize;
        let lambda = rng.uniform(0.1, 1.0);
        let q_rows = random_spd_rows(&mut rng, n, lambda);
        let center: Vec<f64> = (0..n).map(|_| rng.uniform(-2.0, 2.0)).collect();
        let eta = rng.uniform(0.5, 3.0);

        let spread = if case % 3 == 0 { 0.3 } else { 6.0 };
        let x: Vec<f64> = center
            .iter()
            .map(|c| c + rng.uniform(-spread, spread))
            .collect();

        let set = Ellipsoid::new(
            Vector::new(center.clone()).unwrap(),
            SpdMatrix::from_rows(&q_rows).unwrap(),
            eta,
        )
        .unwrap();
        let got = set
            .project(&Vector::new(x.clone()).unwrap(), 1e-12)
            .unwrap();
        let want = pgd_ellipsoid_project(&center, &flatten(&q_rows), eta, &x);
        worst = worst.max(dist_to(&got, &want));
    }
    worst
}

/// Worst relative distance between the library's polyhedral projection
/// and subset enumeration over `cases` random feasible cut systems with
/// m <= 6, n <= 4.
pub fn worst_poly_disagreement(cases: usize, seed: u64) -> f64 {
    let mut rng = SplitMix64::new(seed);
    let mut worst = 0.0_f64;
    for _ in 0..cases {
        let n = 2 + (rng.next_u64() % 3) as usize;
        let m = 1 + (rng.next_u64() % 6) as usize;
        // Positive offsets keep the origin strictly feasible, so every
        // system has a projection.
        let cuts: Vec<(Vec<f64>, f64)> = (0..m)
            .map(|_| {
                let a: Vec<f64> = (0..n).map(|_| rng.uniform(-1.0, 1.0)).collect();
                let b = rng.uniform(0.1, 2.0);
                (a, b)
            })
            .collect();
        let x: Vec<f64> = (0..n).map(|_| rng.uniform(-4.0, 4.0)).collect();

        let poly = Polyhedron::new(
            cuts.iter()
                .map(|(a, b)| HalfSpace::new(Vector::new(a.clone()).unwrap(), *b).unwrap())
                .collect(),
        );
        let got = poly
            .project(&Vector::new(x.clone()).unwrap(), 1e-12)
            .unwrap();
        let want = enum_poly_project(&cuts, &x);
        let scale = 1.0 + x.iter().map(|v| v * v).sum::<f64>().sqrt();
        worst = worst.max(dist_to(&got.point, &want) / scale);
    }
    worst
}

/// Circumcenter of three points solved directly in the test: the
/// combination c = base + s*d1 + t*d2 with both equidistance equations,
/// eliminated by hand.
pub fn circumcenter3(base: &Vector, p1: &Vector, p2: &Vector) -> Vector {
    let n = base.dim();
    let d1: Vec<f64> = (0..n).map(|i| p1[i] - base[i]).collect();
    let d2: Vec<f64> = (0..n).map(|i| p2[i] - base[i]).collect();
    let dot = |a: &[f64], b: &[f64]| -> f64 { a.iter().zip(b).map(|(x, y)| x * y).sum() };
    // ||c - base|| = ||c - p_k||  <=>  <d_k, c - base> = ||d_k||^2 / 2
    let g11 = dot(&d1, &d1);
    let g12 = dot(&d1, &d2);
    let g22 = dot(&d2, &d2);
    let r1 = 0.5 * g11;
    let r2 = 0.5 * g22;
    let det = g11 * g22 - g12 * g12;
    assert!(det.abs() > 1e-12 * g11.max(g22).max(1e-300));
    let s = (r1 * g22 - r2 * g12) / det;
    let t = (g11 * r2 - g12 * r1) / det;
    Vector::new((0..n).map(|i| base[i] + s * d1[i] + t * d2[i]).collect()).unwrap()
}

/// Bitwise equality of two solver traces on everything except timing.
pub fn bitwise_equal_traces(
    a: &polyproj_core::methods::Trace,
    b: &polyproj_core::methods::Trace,
) -> bool {
    if a.iterates.len() != b.iterates.len() || a.termination != b.termination {
        return false;
    }
    for (p, q) in a.iterates.iter().zip(&b.iterates) {
        for (u, v) in p.as_slice().iter().zip(q.as_slice()) {
            if u.to_bits() != v.to_bits() {
                return false;
            }
        }
    }
    a.per_iter.iter().zip(&b.per_iter).all(|(r, s)| {
        r.violation.to_bits() == s.violation.to_bits()
            && r.max_set_distance.to_bits() == s.max_set_distance.to_bits()
            && r.active_cut_count == s.active_cut_count
    })
}
